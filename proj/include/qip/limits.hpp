#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qip {

/// Thrown when a brute-force computation would exceed its configured budget.
class SizeLimitError : public std::length_error {
 public:
  explicit SizeLimitError(const std::string& what) : std::length_error("size limit: " + what) {}
};

struct Limits {
  // leaves of the recursive expansion behind partial_value
  std::uint64_t max_expansion_leaves = std::uint64_t{1} << 22;
  // estimated inner-loop iterations of the optimal-cheater dynamic program
  std::uint64_t max_cheater_work = std::uint64_t{1} << 32;
  // basis branches tracked by the sparse quantum simulator
  std::uint64_t max_branches = std::uint64_t{1} << 20;
  // total register qubits of a quantum-protocol layout
  std::size_t max_layout_qubits = 4096;
  unsigned max_dense_qubits = 26;
};

}  // namespace qip
