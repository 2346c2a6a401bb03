#include "bsr/serialize.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "bsr/errors.hpp"

namespace bsr {

std::uint64_t Block::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }

  std::string chars(std::size_t n) {
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }

  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("truncated BSR1 data");
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_blocks(const std::vector<Block>& blocks) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  for (const Block& b : blocks) {
    if (b.tag.size() != 4) throw DataError("BSR1 block tag must have four characters");
    if (b.values.size() != b.element_count()) throw DataError("BSR1 block " + b.tag + " size mismatch");
    out.insert(out.end(), b.tag.begin(), b.tag.end());
    put_u64(out, b.dims.size());
    for (auto d : b.dims) put_u64(out, d);
    for (double v : b.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<Block> decode_blocks(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  if (in.chars(4) != std::string(kMagic.begin(), kMagic.end())) {
    throw DataError("missing BSR1 magic");
  }
  std::vector<Block> blocks;
  while (!in.done()) {
    Block b;
    b.tag = in.chars(4);
    const auto rank = in.u64();
    if (rank > 16) throw DataError("implausible BSR1 rank in block " + b.tag);
    for (std::uint64_t i = 0; i < rank; ++i) b.dims.push_back(in.u64());
    const auto count = b.element_count();
    if (count > in.remaining() / 8) throw DataError("truncated BSR1 block " + b.tag);
    b.values.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) b.values.push_back(std::bit_cast<double>(in.u64()));
    blocks.push_back(std::move(b));
  }
  return blocks;
}

void write_blocks(const std::filesystem::path& path, const std::vector<Block>& blocks) {
  const auto bytes = encode_blocks(blocks);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<Block> read_blocks(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_blocks(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Block matrix_block(const std::string& tag, const Eigen::MatrixXd& m) {
  Block b;
  b.tag = tag;
  b.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  b.values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) b.values.push_back(m(r, c));
  }
  return b;
}

Eigen::MatrixXd block_matrix(const Block& b) {
  if (b.dims.size() != 2) throw DataError("BSR1 block " + b.tag + " is not a matrix");
  const auto rows = static_cast<Eigen::Index>(b.dims[0]);
  const auto cols = static_cast<Eigen::Index>(b.dims[1]);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = b.values[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

const Block& find_block(const std::vector<Block>& blocks, const std::string& tag) {
  for (const Block& b : blocks) {
    if (b.tag == tag) return b;
  }
  throw DataError("BSR1 data has no block " + tag);
}

}  // namespace bsr
