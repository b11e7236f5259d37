#pragma once

#include <algorithm>
#include <vector>

#include "hvrfif/errors.hpp"

namespace hvrfif {

/// Minimal dense row-major matrix; big-library linear algebra is not needed
/// for the n-by-n transition structures handled here.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    bool square() const { return rows == cols; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    /// this * diag-free dense product
    Matrix operator*(const Matrix& rhs) const {
        Matrix out(rows, rhs.cols);
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) {
                double v = at(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < rhs.cols; ++j) out.at(i, j) += v * rhs.at(k, j);
            }
        return out;
    }
};

/// left-multiplication by diag(d): rows scaled.
inline Matrix diag_times(const std::vector<double>& d, const Matrix& m) {
    Matrix out = m;
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out.at(i, j) *= d[static_cast<std::size_t>(i)];
    return out;
}

/// Strong connectivity of the support digraph (edge i->j iff a_ij > 0):
/// one forward and one reverse reachability sweep from node 0.
inline bool strongly_connected(const Matrix& m) {
    require(m.square(), errc::invalid_parameter, "connectivity needs a square matrix");
    int n = m.rows;
    if (n <= 1) return true;
    auto reach = [&](bool transpose) {
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        std::vector<int> stack{0};
        seen[0] = true;
        int count = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                double w = transpose ? m.at(v, u) : m.at(u, v);
                if (w > 0.0 && !seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = true;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == n;
    };
    return reach(false) && reach(true);
}

/// Strongly connected components of the support digraph (iterative Tarjan).
/// Returns component id per node; ids are otherwise arbitrary.
inline std::vector<int> strong_components(const Matrix& m) {
    int n = m.rows;
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    int next_index = 0, next_comp = 0;

    struct Frame {
        int v;
        int child;
    };
    for (int root = 0; root < n; ++root) {
        if (index[static_cast<std::size_t>(root)] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = next_index++;
        stack.push_back(root);
        on_stack[static_cast<std::size_t>(root)] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            int v = f.v;
            bool descended = false;
            while (f.child < n) {
                int w = f.child++;
                if (m.at(v, w) <= 0.0) continue;
                if (index[static_cast<std::size_t>(w)] == -1) {
                    index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = next_index++;
                    stack.push_back(w);
                    on_stack[static_cast<std::size_t>(w)] = true;
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[static_cast<std::size_t>(w)])
                    low[static_cast<std::size_t>(v)] = std::min(low[static_cast<std::size_t>(v)], index[static_cast<std::size_t>(w)]);
            }
            if (descended) continue;
            if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
                for (;;) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<std::size_t>(w)] = false;
                    comp[static_cast<std::size_t>(w)] = next_comp;
                    if (w == v) break;
                }
                ++next_comp;
            }
            call.pop_back();
            if (!call.empty()) {
                int parent = call.back().v;
                low[static_cast<std::size_t>(parent)] =
                    std::min(low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(v)]);
            }
        }
    }
    return comp;
}

}  // namespace hvrfif
