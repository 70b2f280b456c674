#pragma once

#include <istream>
#include <ostream>

#include "recbench/params.hpp"
#include "recbench/sparse.hpp"

namespace recbench::io {

template <typename T>
void writePod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T readPod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(is.good(), "truncated model file");
  return v;
}

void writeString(std::ostream& os, const std::string& s);
std::string readString(std::istream& is);

void writeParams(std::ostream& os, const ParamMap& params);
ParamMap readParams(std::istream& is);

void writeSparse(std::ostream& os, const SparseMatrix& m);
SparseMatrix readSparse(std::istream& is);

void writeDense(std::ostream& os, const RowMatrix& m);
RowMatrix readDense(std::istream& is);

void writeDenseColMajor(std::ostream& os, const DenseMatrix& m);
DenseMatrix readDenseColMajor(std::istream& is);

void writeDenseVector(std::ostream& os, const Vector& v);
Vector readDenseVector(std::istream& is);

}  // namespace recbench::io
