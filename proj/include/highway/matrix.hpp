#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace highway {

// Dense row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    void zero() { std::fill(data.begin(), data.end(), 0.0); }

    // resize without preserving contents; zero-filled
    void reset(int r, int c) {
        rows = r;
        cols = c;
        data.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0);
    }
};

// Sparse matrix in compressed sparse row form with explicit values.
struct CsrMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;  // size rows + 1
    std::vector<int> col;      // size nnz, ascending within each row
    std::vector<double> val;   // size nnz

    int nnz() const { return static_cast<int>(col.size()); }
};

// Transposed view of a CsrMatrix: per column, the touching rows and where
// each entry sits in the CSR value array. Rows ascend within a column.
struct CscIndex {
    std::vector<int> col_ptr;  // size cols + 1
    std::vector<int> row;      // size nnz
    std::vector<int> pos;      // index into CsrMatrix::val
};

CscIndex build_csc_index(const CsrMatrix& m);

}  // namespace highway
