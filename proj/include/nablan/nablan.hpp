// SPDX-License-Identifier: MIT
//
// Umbrella header.

#pragma once

#include "nablan/io.hpp"
#include "nablan/krawtchouk.hpp"
#include "nablan/measure.hpp"
#include "nablan/operators.hpp"
#include "nablan/scalar.hpp"
#include "nablan/spectral.hpp"
#include "nablan/translation.hpp"
#include "nablan/types.hpp"
