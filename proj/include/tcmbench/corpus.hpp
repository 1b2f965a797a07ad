#pragma once

#include "tcmbench/corpus/blocklist.hpp"
#include "tcmbench/corpus/document.hpp"
#include "tcmbench/corpus/instructions.hpp"
#include "tcmbench/corpus/io.hpp"
#include "tcmbench/corpus/manifest.hpp"
#include "tcmbench/corpus/minhash.hpp"
#include "tcmbench/corpus/pipeline.hpp"
