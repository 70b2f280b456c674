#include "recbench/model_io.hpp"

namespace recbench::io {

void writeString(std::ostream& os, const std::string& s) {
  writePod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string readString(std::istream& is) {
  auto n = readPod<std::uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  require(is.good(), "truncated model file");
  return s;
}

void writeParams(std::ostream& os, const ParamMap& params) {
  writePod<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& [k, v] : params) {
    writeString(os, k);
    writePod<std::uint8_t>(os, static_cast<std::uint8_t>(v.index()));
    if (std::holds_alternative<bool>(v))
      writePod<std::uint8_t>(os, std::get<bool>(v) ? 1 : 0);
    else if (std::holds_alternative<std::int64_t>(v))
      writePod<std::int64_t>(os, std::get<std::int64_t>(v));
    else if (std::holds_alternative<double>(v))
      writePod<double>(os, std::get<double>(v));
    else
      writeString(os, std::get<std::string>(v));
  }
}

ParamMap readParams(std::istream& is) {
  ParamMap params;
  auto n = readPod<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string key = readString(is);
    auto tag = readPod<std::uint8_t>(is);
    switch (tag) {
      case 0: params[key] = (readPod<std::uint8_t>(is) != 0); break;
      case 1: params[key] = readPod<std::int64_t>(is); break;
      case 2: params[key] = readPod<double>(is); break;
      case 3: params[key] = readString(is); break;
      default: fail("corrupt parameter block");
    }
  }
  return params;
}

void writeSparse(std::ostream& os, const SparseMatrix& m) {
  writePod<Index>(os, m.rows());
  writePod<Index>(os, m.cols());
  writePod<std::uint64_t>(os, static_cast<std::uint64_t>(m.nonZeros()));
  os.write(reinterpret_cast<const char*>(m.indptr().data()),
           static_cast<std::streamsize>(m.indptr().size() * sizeof(Index)));
  os.write(reinterpret_cast<const char*>(m.colIndices().data()),
           static_cast<std::streamsize>(m.colIndices().size() * sizeof(Index)));
  os.write(reinterpret_cast<const char*>(m.values().data()),
           static_cast<std::streamsize>(m.values().size() * sizeof(double)));
}

SparseMatrix readSparse(std::istream& is) {
  Index rows = readPod<Index>(is);
  Index cols = readPod<Index>(is);
  auto nnz = readPod<std::uint64_t>(is);
  std::vector<Index> indptr(rows + 1);
  std::vector<Index> col_idx(nnz);
  std::vector<double> vals(nnz);
  is.read(reinterpret_cast<char*>(indptr.data()),
          static_cast<std::streamsize>(indptr.size() * sizeof(Index)));
  is.read(reinterpret_cast<char*>(col_idx.data()),
          static_cast<std::streamsize>(nnz * sizeof(Index)));
  is.read(reinterpret_cast<char*>(vals.data()),
          static_cast<std::streamsize>(nnz * sizeof(double)));
  require(is.good(), "truncated model file");
  std::vector<Triplet> trips;
  trips.reserve(nnz);
  for (Index r = 0; r < rows; ++r)
    for (Index k = indptr[r]; k < indptr[r + 1]; ++k)
      trips.push_back({r, col_idx[k], vals[k]});
  return SparseMatrix::fromTriplets(rows, cols, std::move(trips));
}

void writeDense(std::ostream& os, const RowMatrix& m) {
  writePod<std::int64_t>(os, m.rows());
  writePod<std::int64_t>(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
}

RowMatrix readDense(std::istream& is) {
  auto rows = readPod<std::int64_t>(is);
  auto cols = readPod<std::int64_t>(is);
  RowMatrix m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  require(is.good(), "truncated model file");
  return m;
}

void writeDenseColMajor(std::ostream& os, const DenseMatrix& m) {
  writePod<std::int64_t>(os, m.rows());
  writePod<std::int64_t>(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
}

DenseMatrix readDenseColMajor(std::istream& is) {
  auto rows = readPod<std::int64_t>(is);
  auto cols = readPod<std::int64_t>(is);
  DenseMatrix m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  require(is.good(), "truncated model file");
  return m;
}

void writeDenseVector(std::ostream& os, const Vector& v) {
  writePod<std::int64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Vector readDenseVector(std::istream& is) {
  auto n = readPod<std::int64_t>(is);
  Vector v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  require(is.good(), "truncated model file");
  return v;
}

}  // namespace recbench::io
