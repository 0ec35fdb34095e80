#include "pide/relu_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pide {

AffineLayer::AffineLayer(std::size_t rows, std::size_t cols) : rows_(0), cols_(cols) {
    (void)rows;
}

AffineLayer AffineLayer::from_dense(std::size_t rows, std::size_t cols,
                                    std::span<const double> w_row_major,
                                    std::span<const double> bias) {
    if (w_row_major.size() != rows * cols)
        throw std::invalid_argument("from_dense: weight count mismatch");
    if (!bias.empty() && bias.size() != rows)
        throw std::invalid_argument("from_dense: bias length mismatch");
    AffineLayer l;
    l.cols_ = cols;
    for (std::size_t r = 0; r < rows; ++r) {
        l.begin_row();
        for (std::size_t c = 0; c < cols; ++c) l.push(c, w_row_major[r * cols + c]);
    }
    std::vector<double> b(rows, 0.0);
    if (!bias.empty()) b.assign(bias.begin(), bias.end());
    l.finish(std::move(b));
    return l;
}

void AffineLayer::begin_row() {
    row_ptr_.push_back(col_idx_.size());
    ++rows_;
}

void AffineLayer::push(std::size_t col, double value) {
    if (value == 0.0) return;
    if (col >= cols_) throw std::invalid_argument("push: column out of range");
    col_idx_.push_back(col);
    vals_.push_back(value);
    row_ptr_.back() = col_idx_.size();
}

void AffineLayer::finish(std::vector<double> bias) {
    if (bias.size() != rows_) throw std::invalid_argument("finish: bias length mismatch");
    bias_ = std::move(bias);
}

void AffineLayer::apply(std::span<const double> x, std::vector<double>& y) const {
    if (x.size() != cols_) throw std::invalid_argument("apply: input dimension mismatch");
    y.assign(bias_.begin(), bias_.end());
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = y[r];
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            acc += vals_[k] * x[col_idx_[k]];
        y[r] = acc;
    }
}

double AffineLayer::coeff(std::size_t r, std::size_t c) const {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        if (col_idx_[k] == c) return vals_[k];
    return 0.0;
}

std::vector<double> AffineLayer::to_dense() const {
    std::vector<double> w(rows_ * cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            w[r * cols_ + col_idx_[k]] = vals_[k];
    return w;
}

std::size_t AffineLayer::nnz_weights() const {
    std::size_t n = 0;
    for (double v : vals_)
        if (v != 0.0) ++n;
    return n;
}

std::size_t AffineLayer::nnz_bias() const {
    std::size_t n = 0;
    for (double v : bias_)
        if (v != 0.0) ++n;
    return n;
}

std::size_t AffineLayer::nnz() const { return nnz_weights() + nnz_bias(); }

ReluNet::ReluNet(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("ReluNet: empty layer stack");
    for (std::size_t l = 1; l < layers_.size(); ++l)
        if (layers_[l].cols() != layers_[l - 1].rows())
            throw std::invalid_argument("ReluNet: layer dimension chain broken");
}

std::size_t ReluNet::input_dim() const { return layers_.front().cols(); }
std::size_t ReluNet::output_dim() const { return layers_.back().rows(); }

void ReluNet::eval_into(std::span<const double> x, std::vector<double>& out,
                        std::vector<double>& scratch) const {
    if (x.size() != input_dim()) throw std::invalid_argument("eval: input dimension mismatch");
    layers_[0].apply(x, out);
    for (std::size_t l = 1; l < layers_.size(); ++l) {
        for (auto& v : out) v = v > 0.0 ? v : 0.0;  // rho between layers only
        scratch.swap(out);
        layers_[l].apply(scratch, out);
    }
}

std::vector<double> ReluNet::eval(std::span<const double> x) const {
    std::vector<double> out, scratch;
    eval_into(x, out, scratch);
    return out;
}

std::size_t ReluNet::size() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.nnz();
    return n;
}

SizeReport make_size_report(std::size_t actual, std::size_t bound, std::string label) {
    return SizeReport{actual, bound, actual <= bound, std::move(label)};
}

namespace {

// Dense scratch accumulator for sparse row sums/products.
struct RowAccum {
    std::vector<double> val;
    std::vector<char> seen;
    std::vector<std::size_t> touched;
    void init(std::size_t n) {
        val.assign(n, 0.0);
        seen.assign(n, 0);
        touched.clear();
    }
    void add(std::size_t j, double v) {
        if (!seen[j]) {
            seen[j] = 1;
            touched.push_back(j);
        }
        val[j] += v;
    }
    void flush_into(AffineLayer& out) {
        std::sort(touched.begin(), touched.end());
        for (auto j : touched) {
            out.push(j, val[j]);
            val[j] = 0.0;
            seen[j] = 0;
        }
        touched.clear();
    }
};

// Affine-affine fusion: (outer o inner)(x) = A_o(A_i x + b_i) + b_o.
AffineLayer fuse_affine(const AffineLayer& outer, const AffineLayer& inner) {
    AffineLayer out(0, inner.cols());
    RowAccum acc;
    acc.init(inner.cols());
    std::vector<double> bias(outer.rows(), 0.0);
    for (std::size_t r = 0; r < outer.rows(); ++r) {
        out.begin_row();
        double b = outer.bias()[r];
        for (std::size_t k = outer.row_begin(r); k < outer.row_end(r); ++k) {
            const std::size_t mid = outer.entry_col(k);
            const double a = outer.entry_val(k);
            b += a * inner.bias()[mid];
            for (std::size_t k2 = inner.row_begin(mid); k2 < inner.row_end(mid); ++k2)
                acc.add(inner.entry_col(k2), a * inner.entry_val(k2));
        }
        acc.flush_into(out);
        bias[r] = b;
    }
    out.finish(std::move(bias));
    return out;
}

// Duplicate-and-negate a layer: rows (W; -W), bias (b; -b). Feeding the result
// through rho yields (rho(y), rho(-y)), from which y = rho(y) - rho(-y).
AffineLayer double_layer(const AffineLayer& l) {
    AffineLayer out(0, l.cols());
    std::vector<double> bias;
    bias.reserve(2 * l.rows());
    for (std::size_t r = 0; r < l.rows(); ++r) {
        out.begin_row();
        for (std::size_t k = l.row_begin(r); k < l.row_end(r); ++k)
            out.push(l.entry_col(k), l.entry_val(k));
    }
    for (std::size_t r = 0; r < l.rows(); ++r) {
        out.begin_row();
        for (std::size_t k = l.row_begin(r); k < l.row_end(r); ++k)
            out.push(l.entry_col(k), -l.entry_val(k));
    }
    for (std::size_t r = 0; r < l.rows(); ++r) bias.push_back(l.bias()[r]);
    for (std::size_t r = 0; r < l.rows(); ++r) bias.push_back(-l.bias()[r]);
    out.finish(std::move(bias));
    return out;
}

// Rewire a layer to read the doubled representation: W -> (W | -W).
AffineLayer split_input_layer(const AffineLayer& l) {
    const std::size_t k0 = l.cols();
    AffineLayer out(0, 2 * k0);
    for (std::size_t r = 0; r < l.rows(); ++r) {
        out.begin_row();
        for (std::size_t k = l.row_begin(r); k < l.row_end(r); ++k)
            out.push(l.entry_col(k), l.entry_val(k));
        for (std::size_t k = l.row_begin(r); k < l.row_end(r); ++k)
            out.push(k0 + l.entry_col(k), -l.entry_val(k));
    }
    out.finish(std::vector<double>(l.bias().begin(), l.bias().end()));
    return out;
}

std::size_t layers_nnz(const std::vector<AffineLayer>& ls) {
    std::size_t n = 0;
    for (const auto& l : ls) n += l.nnz();
    return n;
}

}  // namespace

ReluNet compose(const ReluNet& outer, const ReluNet& inner) {
    if (inner.output_dim() != outer.input_dim())
        throw std::invalid_argument("compose: inner output dim != outer input dim");

    // Candidate A: CPWL junction with the doubled signal.
    std::vector<AffineLayer> junction;
    junction.reserve(inner.depth() + outer.depth());
    for (std::size_t l = 0; l + 1 < inner.depth(); ++l) junction.push_back(inner.layers()[l]);
    junction.push_back(double_layer(inner.layers().back()));
    junction.push_back(split_input_layer(outer.layers().front()));
    for (std::size_t l = 1; l < outer.depth(); ++l) junction.push_back(outer.layers()[l]);

    // Candidate B: fuse when one side is a single affine map.
    std::optional<std::vector<AffineLayer>> fused;
    if (inner.depth() == 1) {
        std::vector<AffineLayer> ls;
        ls.push_back(fuse_affine(outer.layers().front(), inner.layers().front()));
        for (std::size_t l = 1; l < outer.depth(); ++l) ls.push_back(outer.layers()[l]);
        fused = std::move(ls);
    } else if (outer.depth() == 1) {
        std::vector<AffineLayer> ls(inner.layers().begin(), inner.layers().end() - 1);
        ls.push_back(fuse_affine(outer.layers().front(), inner.layers().back()));
        fused = std::move(ls);
    }

    if (fused && layers_nnz(*fused) <= layers_nnz(junction)) return ReluNet(std::move(*fused));
    return ReluNet(std::move(junction));
}

ReluNet linear_combine(const std::vector<const ReluNet*>& nets, std::span<const double> coeffs) {
    if (nets.empty()) throw std::invalid_argument("linear_combine: empty net list");
    if (nets.size() != coeffs.size())
        throw std::invalid_argument("linear_combine: coefficient count mismatch");
    const std::size_t n_in = nets[0]->input_dim();
    const std::size_t n_out = nets[0]->output_dim();
    for (const auto* n : nets) {
        if (n->input_dim() != n_in || n->output_dim() != n_out)
            throw std::invalid_argument("linear_combine: mismatched net dimensions");
    }

    std::size_t l_max = 0;
    for (const auto* n : nets) l_max = std::max(l_max, n->depth());

    if (nets.size() == 1) {
        // Fold the coefficient into the final layer.
        const ReluNet& src = *nets[0];
        std::vector<AffineLayer> ls(src.layers().begin(), src.layers().end() - 1);
        const AffineLayer& last = src.layers().back();
        AffineLayer scaled(0, last.cols());
        std::vector<double> bias(last.rows());
        for (std::size_t r = 0; r < last.rows(); ++r) {
            scaled.begin_row();
            for (std::size_t k = last.row_begin(r); k < last.row_end(r); ++k)
                scaled.push(last.entry_col(k), coeffs[0] * last.entry_val(k));
            bias[r] = coeffs[0] * last.bias()[r];
        }
        scaled.finish(std::move(bias));
        ls.push_back(std::move(scaled));
        return ReluNet(std::move(ls));
    }

    if (l_max == 1) {
        // Pure affine sum: a single fused layer.
        AffineLayer out(0, n_in);
        RowAccum acc;
        acc.init(n_in);
        std::vector<double> bias(n_out, 0.0);
        for (std::size_t r = 0; r < n_out; ++r) {
            out.begin_row();
            for (std::size_t i = 0; i < nets.size(); ++i) {
                const AffineLayer& l = nets[i]->layers().front();
                for (std::size_t k = l.row_begin(r); k < l.row_end(r); ++k)
                    acc.add(l.entry_col(k), coeffs[i] * l.entry_val(k));
                bias[r] += coeffs[i] * l.bias()[r];
            }
            acc.flush_into(out);
        }
        out.finish(std::move(bias));
        return ReluNet({std::move(out)});
    }

    // General case. Net i occupies layers start_i .. l_max with
    // start_i = l_max - depth_i + 1; nets starting late read the input from a
    // shared rho(x)/rho(-x) bus that is carried while still needed.
    const std::size_t n_nets = nets.size();
    std::vector<std::size_t> start(n_nets);
    std::size_t max_start = 1;
    for (std::size_t i = 0; i < n_nets; ++i) {
        start[i] = l_max - nets[i]->depth() + 1;
        max_start = std::max(max_start, start[i]);
    }

    // The bus exists at the output of layers 1 .. max_start-1.
    std::vector<AffineLayer> out_layers;
    // Offsets of each block in the previous layer's output.
    std::size_t prev_bus_off = static_cast<std::size_t>(-1);
    std::vector<std::size_t> prev_net_off(n_nets, static_cast<std::size_t>(-1));
    std::size_t prev_width = n_in;  // layer 0 = raw input

    for (std::size_t layer = 1; layer <= l_max; ++layer) {
        AffineLayer al(0, prev_width);
        std::vector<double> bias;
        std::size_t next_bus_off = static_cast<std::size_t>(-1);
        std::vector<std::size_t> next_net_off(n_nets, static_cast<std::size_t>(-1));
        std::size_t width = 0;

        const bool bus_next = layer < max_start;  // bus needed at this layer's output
        if (bus_next) {
            next_bus_off = width;
            if (layer == 1) {
                for (std::size_t j = 0; j < n_in; ++j) {  // rho(x)
                    al.begin_row();
                    al.push(j, 1.0);
                    bias.push_back(0.0);
                }
                for (std::size_t j = 0; j < n_in; ++j) {  // rho(-x)
                    al.begin_row();
                    al.push(j, -1.0);
                    bias.push_back(0.0);
                }
            } else {
                for (std::size_t j = 0; j < 2 * n_in; ++j) {  // carry
                    al.begin_row();
                    al.push(prev_bus_off + j, 1.0);
                    bias.push_back(0.0);
                }
            }
            width += 2 * n_in;
        }

        const bool is_last = layer == l_max;
        if (is_last) {
            // Merged output block: sum of coefficient-scaled final layers.
            RowAccum acc;
            acc.init(prev_width);
            std::vector<double> obias(n_out, 0.0);
            for (std::size_t r = 0; r < n_out; ++r) {
                al.begin_row();
                for (std::size_t i = 0; i < n_nets; ++i) {
                    const AffineLayer& fl = nets[i]->layers().back();
                    obias[r] += coeffs[i] * fl.bias()[r];
                    if (nets[i]->depth() == 1) {
                        // Reads the bus: a (W | -W) pair on bus columns.
                        for (std::size_t k = fl.row_begin(r); k < fl.row_end(r); ++k) {
                            acc.add(prev_bus_off + fl.entry_col(k), coeffs[i] * fl.entry_val(k));
                            acc.add(prev_bus_off + n_in + fl.entry_col(k), -coeffs[i] * fl.entry_val(k));
                        }
                    } else {
                        for (std::size_t k = fl.row_begin(r); k < fl.row_end(r); ++k)
                            acc.add(prev_net_off[i] + fl.entry_col(k), coeffs[i] * fl.entry_val(k));
                    }
                }
                acc.flush_into(al);
            }
            for (double b : obias) bias.push_back(b);
            width += n_out;
        } else {
            for (std::size_t i = 0; i < n_nets; ++i) {
                if (start[i] > layer) continue;       // not started yet
                const std::size_t li = layer - start[i];  // 0-based own layer
                if (li + 1 >= nets[i]->depth()) continue;  // final layer handled at l_max
                const AffineLayer& sl = nets[i]->layers()[li];
                next_net_off[i] = width;
                if (li == 0 && start[i] > 1) {
                    // First layer reading the bus.
                    for (std::size_t r = 0; r < sl.rows(); ++r) {
                        al.begin_row();
                        for (std::size_t k = sl.row_begin(r); k < sl.row_end(r); ++k) {
                            al.push(prev_bus_off + sl.entry_col(k), sl.entry_val(k));
                            al.push(prev_bus_off + n_in + sl.entry_col(k), -sl.entry_val(k));
                        }
                        bias.push_back(sl.bias()[r]);
                    }
                } else {
                    const std::size_t base = li == 0 ? 0 : prev_net_off[i];
                    for (std::size_t r = 0; r < sl.rows(); ++r) {
                        al.begin_row();
                        for (std::size_t k = sl.row_begin(r); k < sl.row_end(r); ++k)
                            al.push(base + sl.entry_col(k), sl.entry_val(k));
                        bias.push_back(sl.bias()[r]);
                    }
                }
                width += sl.rows();
            }
        }

        al.finish(std::move(bias));
        out_layers.push_back(std::move(al));
        prev_bus_off = next_bus_off;
        prev_net_off = std::move(next_net_off);
        prev_width = width;
    }
    return ReluNet(std::move(out_layers));
}

ReluNet linear_combine(const std::vector<ReluNet>& nets, std::span<const double> coeffs) {
    std::vector<const ReluNet*> ptrs;
    ptrs.reserve(nets.size());
    for (const auto& n : nets) ptrs.push_back(&n);
    return linear_combine(ptrs, coeffs);
}

ReluNet identity_net(std::size_t d, std::span<const double> bias) {
    if (d < 1) throw std::invalid_argument("identity_net: d must be >= 1");
    if (!bias.empty() && bias.size() != d)
        throw std::invalid_argument("identity_net: bias length mismatch");
    AffineLayer l(0, d);
    std::vector<double> b(d, 0.0);
    if (!bias.empty()) b.assign(bias.begin(), bias.end());
    for (std::size_t r = 0; r < d; ++r) {
        l.begin_row();
        l.push(r, 1.0);
    }
    l.finish(std::move(b));
    return ReluNet({std::move(l)});
}

ReluNet pair_input_net(const ReluNet& net) {
    const AffineLayer& first = net.layers().front();
    AffineLayer shifted(0, first.cols() + 1);
    std::vector<double> bias(first.bias().begin(), first.bias().end());
    for (std::size_t r = 0; r < first.rows(); ++r) {
        shifted.begin_row();
        for (std::size_t k = first.row_begin(r); k < first.row_end(r); ++k)
            shifted.push(first.entry_col(k) + 1, first.entry_val(k));
    }
    shifted.finish(std::move(bias));
    std::vector<AffineLayer> ls;
    ls.push_back(std::move(shifted));
    for (std::size_t l = 1; l < net.depth(); ++l) ls.push_back(net.layers()[l]);
    return ReluNet(std::move(ls));
}

// ---- serialization (hex floats; exact float64 round trip) ----

namespace {
void write_hex(std::ostream& os, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    os << buf;
}
double read_hex(std::istream& is) {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error("relunet load: truncated stream");
    return std::strtod(tok.c_str(), nullptr);
}
}  // namespace

void ReluNet::save(std::ostream& os) const {
    os << "relunet 1\n";
    os << "layers " << layers_.size() << " input " << input_dim() << "\n";
    for (const auto& l : layers_) {
        os << "layer " << l.rows() << " " << l.cols() << " " << l.vals_.size() << "\n";
        for (std::size_t r = 0; r < l.rows(); ++r) {
            for (std::size_t k = l.row_begin(r); k < l.row_end(r); ++k) {
                os << r << " " << l.entry_col(k) << " ";
                write_hex(os, l.entry_val(k));
                os << "\n";
            }
        }
        os << "bias";
        for (double b : l.bias()) {
            os << " ";
            write_hex(os, b);
        }
        os << "\n";
    }
}

ReluNet ReluNet::load(std::istream& is) {
    std::string word;
    int version = 0;
    if (!(is >> word >> version) || word != "relunet" || version != 1)
        throw std::runtime_error("relunet load: bad header");
    std::size_t n_layers = 0, in_dim = 0;
    if (!(is >> word >> n_layers) || word != "layers")
        throw std::runtime_error("relunet load: bad layer count");
    if (!(is >> word >> in_dim) || word != "input")
        throw std::runtime_error("relunet load: bad input dim");
    std::vector<AffineLayer> layers;
    layers.reserve(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        std::size_t rows = 0, cols = 0, nnz = 0;
        if (!(is >> word >> rows >> cols >> nnz) || word != "layer")
            throw std::runtime_error("relunet load: bad layer header");
        AffineLayer al(0, cols);
        std::size_t cur_row = 0;
        al.begin_row();
        for (std::size_t e = 0; e < nnz; ++e) {
            std::size_t r = 0, c = 0;
            if (!(is >> r >> c)) throw std::runtime_error("relunet load: truncated entries");
            const double v = read_hex(is);
            while (cur_row < r) {
                al.begin_row();
                ++cur_row;
            }
            al.push(c, v);
        }
        while (cur_row + 1 < rows) {
            al.begin_row();
            ++cur_row;
        }
        if (!(is >> word) || word != "bias") throw std::runtime_error("relunet load: bad bias");
        std::vector<double> bias(rows);
        for (auto& b : bias) b = read_hex(is);
        al.finish(std::move(bias));
        layers.push_back(std::move(al));
    }
    return ReluNet(std::move(layers));
}

void ReluNet::save_file(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    save(f);
}

ReluNet ReluNet::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for read: " + path);
    return load(f);
}

}  // namespace pide
