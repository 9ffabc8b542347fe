#pragma once

// Umbrella header for the whole library.

#include "dofinetti/dag.hpp"
#include "dofinetti/dataset.hpp"
#include "dofinetti/discover.hpp"
#include "dofinetti/errors.hpp"
#include "dofinetti/estimate.hpp"
#include "dofinetti/harness.hpp"
#include "dofinetti/joint_table.hpp"
#include "dofinetti/oracle.hpp"
#include "dofinetti/polya_urn.hpp"
#include "dofinetti/prior.hpp"
#include "dofinetti/query.hpp"
#include "dofinetti/rng.hpp"
#include "dofinetti/simulate.hpp"
#include "dofinetti/special.hpp"
