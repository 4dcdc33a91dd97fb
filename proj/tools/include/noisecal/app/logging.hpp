#pragma once

namespace noisecal::app {

/// Installs a stderr logger whose level comes from NOISECAL_LOG
/// (error, info, debug; unset means info). Throws ConfigError otherwise.
void configure_logging();

}  // namespace noisecal::app
