#pragma once

#include "debias/error.hpp"
#include "debias/numeric.hpp"
#include "debias/random.hpp"
#include "debias/linalg.hpp"
#include "debias/observation.hpp"
#include "debias/objective.hpp"
#include "debias/debias.hpp"
#include "debias/transport.hpp"
#include "debias/problems.hpp"
#include "debias/theory.hpp"
#include "debias/harness.hpp"
#include "debias/report.hpp"
