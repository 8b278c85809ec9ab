#pragma once

#include "tsfact/error.hpp"
#include "tsfact/grid.hpp"
#include "tsfact/matrix.hpp"
#include "tsfact/hilbert.hpp"
#include "tsfact/operators.hpp"
#include "tsfact/chain.hpp"
#include "tsfact/ladder.hpp"
#include "tsfact/expr.hpp"
#include "tsfact/io.hpp"
#include "tsfact/config.hpp"
