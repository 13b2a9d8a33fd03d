#include "bsmx/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bsmx {

namespace {

constexpr std::array<char, 4> kMagic = {'B', 'S', 'M', 'X'};

static_assert(std::endian::native == std::endian::little,
              "binary matrix I/O assumes a little-endian host");

double parse_double(std::string_view token, std::size_t line) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
    token.remove_suffix(1);
  }
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError("line " + std::to_string(line) + ": cannot parse '" + std::string(token) +
                     "' as a number");
  }
  return value;
}

std::uint32_t read_u32(std::istream& is) {
  std::array<unsigned char, 4> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), 4)) {
    throw ParseError("truncated binary matrix header");
  }
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> bytes = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                     static_cast<char>((v >> 16) & 0xff),
                                     static_cast<char>((v >> 24) & 0xff)};
  os.write(bytes.data(), 4);
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

Matrix read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) + " columns, found " +
                       std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty CSV matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix_binary(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kMagic) throw ParseError("missing BSMX magic");
  const std::uint32_t rows = read_u32(is);
  const std::uint32_t cols = read_u32(is);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> buf(rows, cols);
  const auto bytes = static_cast<std::streamsize>(sizeof(double) * rows * cols);
  if (bytes > 0 && !is.read(reinterpret_cast<char*>(buf.data()), bytes)) {
    throw ParseError("truncated binary matrix payload (" + std::to_string(rows) + "x" +
                     std::to_string(cols) + " expected)");
  }
  return buf;
}

void write_matrix_binary(std::ostream& os, const Matrix& m) {
  if (m.rows() > 0xffffffffLL || m.cols() > 0xffffffffLL) throw Error("matrix too large for BSMX");
  os.write(kMagic.data(), 4);
  write_u32(os, static_cast<std::uint32_t>(m.rows()));
  write_u32(os, static_cast<std::uint32_t>(m.cols()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> buf = m;
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(sizeof(double) * buf.size()));
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open " + path.string());
  std::array<char, 4> head{};
  is.read(head.data(), 4);
  const bool binary = is.gcount() == 4 && head == kMagic;
  is.clear();
  is.seekg(0);
  try {
    return binary ? read_matrix_binary(is) : read_matrix_csv(is);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  if (path.extension() == ".bsmx") {
    write_matrix_binary(os, m);
  } else {
    write_matrix_csv(os, m);
  }
}

nlohmann::json estimate_to_json(const BlockSparseEstimate& est) {
  nlohmann::json doc;
  doc["active_set"] = est.active_set();
  doc["n_locations"] = est.n_locations();
  doc["n_orient"] = est.n_orient();
  doc["n_times"] = est.n_times();
  nlohmann::json blocks = nlohmann::json::object();
  for (std::size_t i = 0; i < est.size(); ++i) {
    const Matrix& b = est.blocks()[i];
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < b.rows(); ++r) {
      std::vector<double> row(b.cols());
      for (Index t = 0; t < b.cols(); ++t) row[static_cast<std::size_t>(t)] = b(r, t);
      rows.push_back(row);
    }
    blocks[std::to_string(est.active_set()[i])] = std::move(rows);
  }
  doc["blocks"] = std::move(blocks);
  return doc;
}

BlockSparseEstimate estimate_from_json(const nlohmann::json& doc, std::optional<Index> n_locations) {
  try {
    const auto active = doc.at("active_set").get<std::vector<Index>>();
    const auto O = doc.at("n_orient").get<Index>();
    const auto T = doc.at("n_times").get<Index>();
    Index S = 0;
    if (doc.contains("n_locations")) {
      S = doc.at("n_locations").get<Index>();
    } else if (n_locations) {
      S = *n_locations;
    } else {
      throw ParseError("estimate has no n_locations and none was supplied");
    }
    const auto& blocks_doc = doc.at("blocks");
    std::vector<Matrix> blocks;
    for (Index s : active) {
      const auto rows = blocks_doc.at(std::to_string(s)).get<std::vector<std::vector<double>>>();
      if (static_cast<Index>(rows.size()) != O) {
        throw ParseError("block " + std::to_string(s) + " must have n_orient rows");
      }
      Matrix b(O, T);
      for (Index r = 0; r < O; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<Index>(row.size()) != T) {
          throw ParseError("block " + std::to_string(s) + " row must have n_times values");
        }
        for (Index t = 0; t < T; ++t) b(r, t) = row[static_cast<std::size_t>(t)];
      }
      blocks.push_back(std::move(b));
    }
    return BlockSparseEstimate::from_blocks(S, O, T, active, std::move(blocks));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed estimate JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid estimate: ") + e.what());
  }
}

void write_estimate(const std::filesystem::path& path, const BlockSparseEstimate& est) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << estimate_to_json(est).dump(1) << '\n';
}

BlockSparseEstimate read_estimate(const std::filesystem::path& path,
                                  std::optional<Index> n_locations) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return estimate_from_json(doc, n_locations);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  std::array<char, 65536> buf{};
  while (is) {
    is.read(buf.data(), buf.size());
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      hash *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << hash;
  return os.str();
}

}  // namespace bsmx
