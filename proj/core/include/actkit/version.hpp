#pragma once

namespace actkit {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Version of the on-disk formats (trajectory, packed dataset, vocab,
/// benchmark, journal, task spec, report). Bump on any schema change.
inline constexpr const char* kSchemaVersion = "1";

}  // namespace actkit
