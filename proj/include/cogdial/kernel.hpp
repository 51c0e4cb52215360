#pragma once

#include "cogdial/kernel/activation.hpp"
#include "cogdial/kernel/chunk.hpp"
#include "cogdial/kernel/kernel.hpp"
#include "cogdial/kernel/production.hpp"
#include "cogdial/kernel/rng.hpp"
