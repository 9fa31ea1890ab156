#pragma once

#include "rss/infer/auc.hpp"
#include "rss/infer/elr.hpp"
#include "rss/infer/mean.hpp"
#include "rss/infer/prop.hpp"
#include "rss/infer/sign.hpp"
