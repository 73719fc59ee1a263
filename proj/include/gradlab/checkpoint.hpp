#pragma once

#include <string>

#include "gradlab/network.hpp"

namespace gradlab {

// Versioned binary network container: layer kinds, shapes, and parameter
// data as row-major 64-bit little-endian doubles. Layout in
// docs/formats.md. Round-trips bitwise.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace gradlab
