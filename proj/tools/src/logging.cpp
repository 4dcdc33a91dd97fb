#include "noisecal/app/logging.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "noisecal/error.hpp"

namespace noisecal::app {

void configure_logging() {
  const char* env = std::getenv("NOISECAL_LOG");
  const std::string value = env ? env : "info";
  spdlog::level::level_enum level;
  if (value == "error") {
    level = spdlog::level::err;
  } else if (value == "info") {
    level = spdlog::level::info;
  } else if (value == "debug") {
    level = spdlog::level::debug;
  } else {
    throw ConfigError("NOISECAL_LOG must be error, info or debug (got '" + value + "')");
  }
  auto logger = spdlog::get("noisecal");
  if (!logger) logger = spdlog::stderr_logger_mt("noisecal");
  logger->set_pattern("[%l] %v");
  logger->set_level(level);
  spdlog::set_default_logger(logger);
}

}  // namespace noisecal::app
