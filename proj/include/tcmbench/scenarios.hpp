#pragma once

#include "tcmbench/scenarios/embedding.hpp"
#include "tcmbench/scenarios/evaluate.hpp"
#include "tcmbench/scenarios/example.hpp"
#include "tcmbench/scenarios/kind.hpp"
#include "tcmbench/scenarios/parse.hpp"
