#pragma once

#include "vtest/alternatives.hpp"
#include "vtest/asymptotic.hpp"
#include "vtest/errors.hpp"
#include "vtest/exact_arith.hpp"
#include "vtest/exact_null.hpp"
#include "vtest/montecarlo.hpp"
#include "vtest/oracle.hpp"
#include "vtest/random.hpp"
#include "vtest/statistic.hpp"
