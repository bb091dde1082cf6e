// Times the serial reference kernels against the OpenMP variants on
// citation-scale shapes and checks they agree bitwise.
#include <chrono>
#include <cstdio>
#include <functional>

#include "highway/graph.hpp"
#include "highway/kernels.hpp"
#include "highway/rng.hpp"

using namespace highway;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double, std::milli>(dt).count() / reps;
}

Matrix random_matrix(int r, int c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.next_uniform(-1.0, 1.0);
    return m;
}

CsrMatrix random_csr(int rows, int cols, int nnz_per_row, Rng& rng) {
    std::vector<std::pair<int, int>> cells;
    for (int i = 0; i < rows; ++i) {
        for (int k = 0; k < nnz_per_row; ++k) cells.emplace_back(i, rng.next_index(cols));
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    for (auto& [i, j] : cells) ++m.row_ptr[i + 1];
    for (int i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    for (auto& [i, j] : cells) {
        m.col.push_back(j);
        m.val.push_back(rng.next_uniform(-1.0, 1.0));
    }
    return m;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

void report(const char* name, double serial_ms, double par_ms, bool exact) {
    std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n", name,
                serial_ms, par_ms, serial_ms / par_ms, exact ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
    Rng rng(7);
    const int n = 20000, h = 500, d = 64, c = 8;
    const int reps = 10;

    std::printf("kernel benchmark: n=%d h=%d d=%d classes=%d threads=%d\n", n, h, d, c,
                kernels::max_threads());

    {
        CsrMatrix x = random_csr(n, h, 50, rng);
        Matrix w = random_matrix(h, d, rng);
        Matrix out_s, out_p;
        double ts = time_ms([&] { kernels::serial::spmm(x, x.val, w, out_s); }, reps);
        double tp = time_ms([&] { kernels::par::spmm(x, x.val, w, out_p); }, reps);
        report("spmm (features x W)", ts, tp, bitwise_equal(out_s, out_p));
    }
    {
        CsrMatrix adj = random_csr(n, n, 5, rng);
        Matrix b = random_matrix(n, d, rng);
        Matrix out_s, out_p;
        double ts = time_ms([&] { kernels::serial::spmm(adj, adj.val, b, out_s); }, reps);
        double tp = time_ms([&] { kernels::par::spmm(adj, adj.val, b, out_p); }, reps);
        report("spmm (adjacency x H)", ts, tp, bitwise_equal(out_s, out_p));
    }
    {
        CsrMatrix x = random_csr(n, h, 50, rng);
        CscIndex xt = build_csc_index(x);
        Matrix g = random_matrix(n, d, rng);
        Matrix out_s, out_p;
        double ts = time_ms([&] { kernels::serial::spmm_tn(x, xt, x.val, g, out_s); }, reps);
        double tp = time_ms([&] { kernels::par::spmm_tn(x, xt, x.val, g, out_p); }, reps);
        report("spmm_tn (X^T x G)", ts, tp, bitwise_equal(out_s, out_p));
    }
    {
        Matrix a = random_matrix(n, d, rng);
        Matrix w = random_matrix(d, c, rng);
        Matrix out_s, out_p;
        double ts = time_ms([&] { kernels::serial::gemm_nn(a, w, out_s); }, reps);
        double tp = time_ms([&] { kernels::par::gemm_nn(a, w, out_p); }, reps);
        report("gemm_nn (H x W2)", ts, tp, bitwise_equal(out_s, out_p));
    }
    {
        Matrix a = random_matrix(n, d, rng);
        Matrix g = random_matrix(n, c, rng);
        Matrix out_s, out_p;
        double ts = time_ms([&] { kernels::serial::gemm_tn(a, g, out_s); }, reps);
        double tp = time_ms([&] { kernels::par::gemm_tn(a, g, out_p); }, reps);
        report("gemm_tn (H^T x G)", ts, tp, bitwise_equal(out_s, out_p));
    }
    {
        Matrix a = random_matrix(n, c, rng);
        Matrix w = random_matrix(d, c, rng);
        Matrix out_s, out_p;
        double ts = time_ms([&] { kernels::serial::gemm_nt(a, w, out_s); }, reps);
        double tp = time_ms([&] { kernels::par::gemm_nt(a, w, out_p); }, reps);
        report("gemm_nt (G x W^T)", ts, tp, bitwise_equal(out_s, out_p));
    }
    {
        Matrix a = random_matrix(n, c, rng);
        Matrix out_s, out_p;
        double ts = time_ms([&] { kernels::serial::softmax_rows(a, out_s); }, reps);
        double tp = time_ms([&] { kernels::par::softmax_rows(a, out_p); }, reps);
        report("softmax_rows", ts, tp, bitwise_equal(out_s, out_p));
    }
    return 0;
}
