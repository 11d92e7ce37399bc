// SPDX-License-Identifier: MIT
#pragma once

#include "rcp/compress.hpp"
#include "rcp/diagnostics.hpp"
#include "rcp/io.hpp"
#include "rcp/kruskal.hpp"
#include "rcp/random.hpp"
#include "rcp/solve.hpp"
#include "rcp/synthetic.hpp"
#include "rcp/tensor.hpp"
#include "rcp/types.hpp"
