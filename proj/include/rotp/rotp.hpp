// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rotp/codec.hpp"
#include "rotp/data_io.hpp"
#include "rotp/decoder.hpp"
#include "rotp/evaluation.hpp"
#include "rotp/geometry.hpp"
#include "rotp/letterbox.hpp"
#include "rotp/losses.hpp"
#include "rotp/rng.hpp"
#include "rotp/roundtrip.hpp"
