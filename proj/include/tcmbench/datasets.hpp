#pragma once

#include "tcmbench/datasets/dataset.hpp"
#include "tcmbench/datasets/leakage.hpp"
#include "tcmbench/datasets/split.hpp"
