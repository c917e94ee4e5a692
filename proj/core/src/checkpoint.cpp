// Copyright 2026 The tmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <array>
#include <bit>
#include <fstream>
#include <vector>

#include "tmpc/errors.hpp"
#include "tmpc/residual_net.hpp"

namespace tmpc {
namespace {

constexpr std::array<char, 4> kMagic{'T', 'M', 'P', 'C'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

// Row-major regardless of Eigen's storage order.
template <typename M>
void put_matrix(std::vector<unsigned char>& out, const M& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

class Reader {
 public:
  explicit Reader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  template <typename M>
  void matrix(M& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
  }

  unsigned char byte() {
    need(1);
    return bytes_[pos_++];
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint truncated");
  }
  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params) {
  std::vector<unsigned char> out;
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u32(out, kCheckpointVersion);
  put_matrix(out, params.input_shift);
  put_matrix(out, params.input_scale);
  put_matrix(out, params.W1);
  put_matrix(out, params.b1);
  put_matrix(out, params.W2);
  put_matrix(out, params.b2);
  put_matrix(out, params.output_scale);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open checkpoint for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("failed writing checkpoint: " + path.string());
}

MlpParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open checkpoint: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));
  std::array<char, 4> magic{};
  for (char& c : magic) c = static_cast<char>(r.byte());
  if (magic != kMagic) throw FormatError("bad checkpoint magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  MlpParams p;
  r.matrix(p.input_shift);
  r.matrix(p.input_scale);
  r.matrix(p.W1);
  r.matrix(p.b1);
  r.matrix(p.W2);
  r.matrix(p.b2);
  r.matrix(p.output_scale);
  if (!r.at_end()) throw FormatError("trailing bytes in checkpoint");
  p.validate();
  return p;
}

}  // namespace tmpc
