#pragma once

#include "charsum/arith.hpp"
#include "charsum/bounds.hpp"
#include "charsum/characters.hpp"
#include "charsum/condition.hpp"
#include "charsum/error.hpp"
#include "charsum/parallel.hpp"
#include "charsum/phase.hpp"
#include "charsum/polynomial.hpp"
#include "charsum/postnikov.hpp"
#include "charsum/ratfunc.hpp"
#include "charsum/reduction.hpp"
#include "charsum/sums.hpp"
#include "charsum/weil.hpp"
