#pragma once

#include "tcmbench/runner/ablation.hpp"
#include "tcmbench/runner/config.hpp"
#include "tcmbench/runner/execute.hpp"
#include "tcmbench/runner/plan.hpp"
#include "tcmbench/runner/report.hpp"
