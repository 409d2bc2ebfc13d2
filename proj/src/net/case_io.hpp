#ifndef CASCSIM_NET_CASE_IO_HPP
#define CASCSIM_NET_CASE_IO_HPP

#include <string>

#include <json.hpp>

#include "net/network.hpp"

namespace cascsim::net {

// Strict schema: unknown keys are rejected, required keys must be present,
// ids must be unique, and device references must resolve.  Quantities are
// physical in the file (MW, MVAr, MVA, Hz) and per-unit in memory.
Network parse_case(const nlohmann::json& doc);
Network parse_case_text(const std::string& text);
Network parse_case_file(const std::string& path);

// Inverse of parse_case; physical units, keys in schema order.
nlohmann::ordered_json write_case(const Network& net);

} // namespace cascsim::net

#endif
