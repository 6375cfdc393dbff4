#pragma once

#include "freeconv/cmat.hpp"
#include "freeconv/errors.hpp"
#include "freeconv/laws.hpp"
#include "freeconv/linpen.hpp"
#include "freeconv/ncexpr.hpp"
#include "freeconv/recover.hpp"
#include "freeconv/rmt.hpp"
#include "freeconv/subord.hpp"
#include "freeconv/version.hpp"
