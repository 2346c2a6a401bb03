#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bsr {

/// Flat binary model format.
///
/// A file is the 4-byte magic "BSR1" followed by one or more blocks. Each
/// block is a 4-character ASCII tag, a u64 rank, `rank` u64 dimensions, and
/// prod(dimensions) f64 values in row-major order. All integers and floats
/// are little-endian.
struct Block {
  std::string tag;  ///< exactly four characters
  std::vector<std::uint64_t> dims;
  std::vector<double> values;

  [[nodiscard]] std::uint64_t element_count() const;
};

inline constexpr std::array<char, 4> kMagic{'B', 'S', 'R', '1'};

void write_blocks(const std::filesystem::path& path, const std::vector<Block>& blocks);
[[nodiscard]] std::vector<Block> read_blocks(const std::filesystem::path& path);

[[nodiscard]] std::vector<std::uint8_t> encode_blocks(const std::vector<Block>& blocks);
[[nodiscard]] std::vector<Block> decode_blocks(const std::vector<std::uint8_t>& bytes);

[[nodiscard]] Block matrix_block(const std::string& tag, const Eigen::MatrixXd& m);
[[nodiscard]] Eigen::MatrixXd block_matrix(const Block& b);

/// Finds the block with `tag`, throwing DataError if absent.
[[nodiscard]] const Block& find_block(const std::vector<Block>& blocks, const std::string& tag);

}  // namespace bsr
