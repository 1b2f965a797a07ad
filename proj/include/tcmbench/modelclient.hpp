#pragma once

#include "tcmbench/modelclient/batch.hpp"
#include "tcmbench/modelclient/cache.hpp"
#include "tcmbench/modelclient/client.hpp"
#include "tcmbench/modelclient/embed_http.hpp"
#include "tcmbench/modelclient/prompt.hpp"
#include "tcmbench/modelclient/throttle.hpp"
#include "tcmbench/modelclient/types.hpp"
