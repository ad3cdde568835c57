#include "rowtracker/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace rowtracker {

void configure_logging() {
  static const bool sink_installed = [] {
    auto logger = spdlog::stderr_logger_st("rowtracker");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)sink_installed;

  const char* env = std::getenv("ROWTRACKER_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
    if (level != "error") spdlog::error("ROWTRACKER_LOG={} is not one of error, info, debug", level);
  }
}

}  // namespace rowtracker
