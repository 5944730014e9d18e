#pragma once

#include "oemsim/constants.hpp"
#include "oemsim/errors.hpp"
#include "oemsim/model.hpp"
#include "oemsim/dynamics.hpp"
#include "oemsim/gaussian.hpp"
#include "oemsim/sweep.hpp"
