#pragma once
#include <string>

#include "dnk/teacher.hpp"

namespace dnk {

// DNKDEMO1 container for expert demonstrations: 8-byte magic, one text
// header line
//   version=1 M=<records> H=<h> ctx=<c> config=<hex16> seed=<u64>
// then per record the flattened model-space trajectory (H * step entries)
// and the context, each as little-endian 32-bit floats. Demos are quantized
// to 32-bit at generation time, so the in-memory set and the file agree
// bitwise.
void save_demos(const DemoSet& demos, const std::string& path, uint64_t config_hash,
                uint64_t seed);
DemoSet load_demos(const std::string& path, uint64_t* config_hash = nullptr,
                   uint64_t* seed = nullptr);

}  // namespace dnk
