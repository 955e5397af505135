#pragma once

#include "smp/error.hpp"
#include "smp/matrix.hpp"
#include "smp/quadrature.hpp"
#include "smp/distributions.hpp"
#include "smp/model.hpp"
#include "smp/euler.hpp"
#include "smp/quantities.hpp"
#include "smp/simulation.hpp"
#include "smp/compare.hpp"
#include "smp/model_file.hpp"
