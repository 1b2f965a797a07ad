#pragma once

#include "tcmbench/metrics/bertscore.hpp"
#include "tcmbench/metrics/classification.hpp"
#include "tcmbench/metrics/generation.hpp"
#include "tcmbench/metrics/ngram.hpp"
#include "tcmbench/metrics/ranking.hpp"
#include "tcmbench/metrics/tokenize.hpp"
#include "tcmbench/metrics/types.hpp"
