#pragma once

#include "rss/allocate.hpp"
#include "rss/bench.hpp"
#include "rss/core.hpp"
#include "rss/errors.hpp"
#include "rss/infer.hpp"
#include "rss/io.hpp"
#include "rss/numerics.hpp"
#include "rss/rng.hpp"
#include "rss/sampling.hpp"
#include "rss/simulate.hpp"
