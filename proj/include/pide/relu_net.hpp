#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pide {

// One affine map W x + b. The matrix is logically dense (N_l x N_{l-1});
// entries are stored row-compressed because the networks assembled by the
// composition calculus are block-diagonal and would not fit in memory as
// dense arrays. Size accounting counts entries whose value is exactly
// nonzero, matching the structural parameter count.
class AffineLayer {
public:
    AffineLayer() = default;
    AffineLayer(std::size_t rows, std::size_t cols);

    static AffineLayer from_dense(std::size_t rows, std::size_t cols,
                                  std::span<const double> w_row_major,
                                  std::span<const double> bias);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    // y = W x + b
    void apply(std::span<const double> x, std::vector<double>& y) const;

    double coeff(std::size_t r, std::size_t c) const;  // dense-style accessor
    std::vector<double> to_dense() const;              // row-major, tests only

    std::size_t nnz() const;  // nonzero weight entries + nonzero bias entries
    std::size_t nnz_weights() const;
    std::size_t nnz_bias() const;

    const std::vector<double>& bias() const { return bias_; }
    std::vector<double>& bias() { return bias_; }

    // Assembly interface: push entries row by row.
    void begin_row();
    void push(std::size_t col, double value);  // zero values are dropped
    void finish(std::vector<double> bias);

    std::size_t row_begin(std::size_t r) const { return row_ptr_[r]; }
    std::size_t row_end(std::size_t r) const { return row_ptr_[r + 1]; }
    std::size_t entry_col(std::size_t k) const { return col_idx_[k]; }
    double entry_val(std::size_t k) const { return vals_[k]; }

private:
    friend class ReluNet;
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> vals_;
    std::vector<double> bias_;
};

// ReLU network: x -> W_L( rho( W_{L-1}( ... rho(W_1 x + b_1) ... ))) + b_L.
// No activation after the last layer. Immutable after construction; eval is
// pure and safe to call concurrently.
class ReluNet {
public:
    ReluNet() = default;
    explicit ReluNet(std::vector<AffineLayer> layers);

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t depth() const { return layers_.size(); }
    const std::vector<AffineLayer>& layers() const { return layers_; }

    std::vector<double> eval(std::span<const double> x) const;
    void eval_into(std::span<const double> x, std::vector<double>& out,
                   std::vector<double>& scratch) const;

    // Total count of nonzero weight and bias entries over all layers.
    std::size_t size() const;

    void save(std::ostream& os) const;
    static ReluNet load(std::istream& is);
    void save_file(const std::string& path) const;
    static ReluNet load_file(const std::string& path);

private:
    std::vector<AffineLayer> layers_;
};

struct SizeReport {
    std::size_t actual = 0;
    std::size_t bound = 0;
    bool satisfied = false;
    std::string label;
};

SizeReport make_size_report(std::size_t actual, std::size_t bound, std::string label = {});

// phi(x) = outer(inner(x)). Uses the CPWL identity y = rho(y) - rho(-y) at
// the junction, so size(result) <= 2 size(outer) + 2 size(inner); when one
// side is a single affine layer the maps are fused instead if that is
// smaller.
ReluNet compose(const ReluNet& outer, const ReluNet& inner);

// phi(x) = sum_i coeffs[i] * nets[i](x). Coefficients are folded into the
// merged output layer. Networks of unequal depth are aligned to finish
// together; shallower nets read the input from a shared rho(x)/rho(-x) bus,
// whose entries are recorded in the result's size.
ReluNet linear_combine(const std::vector<const ReluNet*>& nets, std::span<const double> coeffs);
ReluNet linear_combine(const std::vector<ReluNet>& nets, std::span<const double> coeffs);

// Single affine layer x -> x + bias (bias optional).
ReluNet identity_net(std::size_t d, std::span<const double> bias = {});

// Adapter: net on x becomes a net on the concatenation (t, x) that ignores t.
ReluNet pair_input_net(const ReluNet& net);

}  // namespace pide
