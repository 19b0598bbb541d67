#pragma once

#include <spdlog/spdlog.h>

namespace elrp {

/// Shared logger. Level comes from the ELRP_LOG environment variable
/// (trace, debug, info, warn, error, off); default is warn.
spdlog::logger& log();

}  // namespace elrp
