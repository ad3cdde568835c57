#pragma once

namespace rowtracker {

/// Sets the global log level from ROWTRACKER_LOG (error, info or debug).
/// Unset means error; an unknown value falls back to error with a warning.
void configure_logging();

}  // namespace rowtracker
