#include "tgen/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace tgen {

namespace {
constexpr char kMagic[8] = {'T', 'G', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
void write_str(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string read_str(std::istream& in) {
  std::string s(read_u64(in), '\0');
  in.read(s.data(), static_cast<std::streamsize>(s.size()));
  return s;
}
}  // namespace

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, meta.size());
  for (const auto& [k, v] : meta) {
    write_str(out, k);
    write_str(out, v);
  }
  write_u64(out, tensors.size());
  for (const auto& [name, m] : tensors) {
    write_str(out, name);
    write_u64(out, static_cast<std::uint64_t>(m.rows()));
    write_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      out.write(reinterpret_cast<const char*>(m.row(r).eval().data()),
                static_cast<std::streamsize>(m.cols() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::string(magic, 8) != std::string(kMagic, 8))
    throw std::runtime_error("not a checkpoint file: " + path);
  Checkpoint ck;
  const auto nmeta = read_u64(in);
  for (std::uint64_t i = 0; i < nmeta; ++i) {
    std::string k = read_str(in);
    ck.meta[k] = read_str(in);
  }
  const auto ntensors = read_u64(in);
  for (std::uint64_t i = 0; i < ntensors; ++i) {
    std::string name = read_str(in);
    const auto rows = static_cast<Eigen::Index>(read_u64(in));
    const auto cols = static_cast<Eigen::Index>(read_u64(in));
    Eigen::MatrixXd m(rows, cols);
    std::vector<double> row(static_cast<size_t>(cols));
    for (Eigen::Index r = 0; r < rows; ++r) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(cols * sizeof(double)));
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<size_t>(c)];
    }
    ck.tensors.emplace(std::move(name), std::move(m));
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return ck;
}

const Eigen::MatrixXd& Checkpoint::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end())
    throw std::runtime_error("checkpoint tensor missing: " + name);
  return it->second;
}

}  // namespace tgen
