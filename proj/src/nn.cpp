#include "neuroplan/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace neuroplan {

void MlpModel::check_shapes() const {
    if (layers.empty()) throw std::invalid_argument("model has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.W.rows() != l.b.size())
            throw std::invalid_argument("layer bias size does not match weight rows");
        if (i > 0 && layers[i - 1].out_size() != l.in_size())
            throw std::invalid_argument("consecutive layer shapes do not compose");
    }
    if (dropout_p < 0.0 || dropout_p > 1.0)
        throw std::invalid_argument("dropout p must lie in [0,1]");
}

namespace {

Matrix run_forward(const MlpModel& m, const Matrix& X, Mode mode, Rng* rng,
                   ForwardCache* cache, const std::vector<Matrix>* fixed_masks) {
    if (X.cols() != m.input_size())
        throw std::invalid_argument("forward: input size mismatch");
    const bool dropout_active = mode != Mode::eval_deterministic && m.dropout_p > 0.0;
    const double keep = 1.0 - m.dropout_p;

    Matrix a = X;
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        const auto& l = m.layers[li];
        if (cache) cache->inputs.push_back(a);

        Matrix z = (a * l.W.transpose()).rowwise() + l.b.transpose();
        if (cache) cache->pre.push_back(z);

        if (l.has_prelu)
            a = z.unaryExpr([s = l.prelu_slope](double v) { return v > 0.0 ? v : s * v; });
        else
            a = std::move(z);

        if (l.has_dropout && dropout_active) {
            Matrix mask;
            if (fixed_masks) {
                mask = (*fixed_masks)[li];
            } else {
                if (keep <= 0.0) {
                    mask = Matrix::Zero(a.rows(), a.cols());
                } else {
                    if (!rng) throw std::invalid_argument("stochastic forward requires an rng");
                    mask.resize(a.rows(), a.cols());
                    const double scale = 1.0 / keep; // inverted dropout
                    for (Eigen::Index r = 0; r < mask.rows(); ++r)
                        for (Eigen::Index c = 0; c < mask.cols(); ++c)
                            mask(r, c) = rng->bernoulli(keep) ? scale : 0.0;
                }
            }
            a = a.cwiseProduct(mask);
            if (cache) cache->masks.push_back(mask);
        } else if (cache) {
            cache->masks.emplace_back(); // keeps mask index aligned with layer index
        }
    }
    if (cache) cache->output = a;
    return a;
}

} // namespace

Matrix forward_batch(const MlpModel& m, const Matrix& X, Mode mode, Rng* rng,
                     ForwardCache* cache) {
    return run_forward(m, X, mode, rng, cache, nullptr);
}

Matrix forward_with_masks(const MlpModel& m, const Matrix& X,
                          const std::vector<Matrix>& masks) {
    return run_forward(m, X, Mode::train, nullptr, nullptr, &masks);
}

Vector forward(const MlpModel& m, const Vector& x, Mode mode, Rng* rng) {
    Matrix X = x.transpose();
    return forward_batch(m, X, mode, rng, nullptr).row(0).transpose();
}

Gradients Gradients::zeros_like(const MlpModel& m) {
    Gradients g;
    for (const auto& l : m.layers) {
        g.dW.push_back(Matrix::Zero(l.W.rows(), l.W.cols()));
        g.db.push_back(Vector::Zero(l.b.size()));
        g.dslope.push_back(0.0);
    }
    return g;
}

void Gradients::add_scaled(const Gradients& other, double s) {
    for (std::size_t i = 0; i < dW.size(); ++i) {
        dW[i] += s * other.dW[i];
        db[i] += s * other.db[i];
        dslope[i] += s * other.dslope[i];
    }
}

Gradients backward(const MlpModel& m, const ForwardCache& cache, const Matrix& dY,
                   Matrix* dX) {
    if (cache.inputs.size() != m.layers.size())
        throw std::invalid_argument("backward: cache does not match model (stale cache?)");

    Gradients g;
    g.dW.resize(m.layers.size());
    g.db.resize(m.layers.size());
    g.dslope.assign(m.layers.size(), 0.0);

    Matrix grad = dY; // dLoss/d(layer output)
    for (int li = static_cast<int>(m.layers.size()) - 1; li >= 0; --li) {
        const auto& l = m.layers[static_cast<std::size_t>(li)];
        const auto& z = cache.pre[static_cast<std::size_t>(li)];
        const auto& mask = cache.masks[static_cast<std::size_t>(li)];

        if (mask.size() > 0) grad = grad.cwiseProduct(mask);

        if (l.has_prelu) {
            double ds = 0.0;
            for (Eigen::Index r = 0; r < z.rows(); ++r)
                for (Eigen::Index c = 0; c < z.cols(); ++c)
                    if (z(r, c) <= 0.0) {
                        ds += grad(r, c) * z(r, c);
                        grad(r, c) *= l.prelu_slope;
                    }
            g.dslope[static_cast<std::size_t>(li)] = ds;
        }

        const auto& x = cache.inputs[static_cast<std::size_t>(li)];
        g.dW[static_cast<std::size_t>(li)] = grad.transpose() * x;
        g.db[static_cast<std::size_t>(li)] = grad.colwise().sum().transpose();
        if (li > 0 || dX) grad = grad * l.W;
    }
    if (dX) *dX = grad;
    return g;
}

AdagradState AdagradState::for_model(const MlpModel& m, double lr) {
    AdagradState st;
    st.learning_rate = lr;
    for (const auto& l : m.layers) {
        st.accW.push_back(Matrix::Zero(l.W.rows(), l.W.cols()));
        st.accb.push_back(Vector::Zero(l.b.size()));
        st.accslope.push_back(0.0);
    }
    return st;
}

void adagrad_step(MlpModel& m, const Gradients& g, AdagradState& st) {
    if (g.dW.size() != m.layers.size() || st.accW.size() != m.layers.size())
        throw std::invalid_argument("adagrad_step: shape mismatch");
    const double lr = st.learning_rate;
    const double eps = st.epsilon;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        auto& l = m.layers[i];
        st.accW[i].array() += g.dW[i].array().square();
        l.W.array() -= lr * g.dW[i].array() / (st.accW[i].array().sqrt() + eps);
        st.accb[i].array() += g.db[i].array().square();
        l.b.array() -= lr * g.db[i].array() / (st.accb[i].array().sqrt() + eps);
        if (l.has_prelu) {
            st.accslope[i] += g.dslope[i] * g.dslope[i];
            l.prelu_slope -= lr * g.dslope[i] / (std::sqrt(st.accslope[i]) + eps);
        }
    }
}

MlpModel make_mlp(const std::vector<int>& sizes, const std::vector<bool>& prelu,
                  const std::vector<bool>& dropout, double dropout_p, std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least one layer");
    const std::size_t n_layers = sizes.size() - 1;
    if (prelu.size() != n_layers || dropout.size() != n_layers)
        throw std::invalid_argument("make_mlp: flag lists must have one entry per layer");

    Rng rng(mix_seed(seed, "mlp_init"));
    MlpModel m;
    m.dropout_p = dropout_p;
    for (std::size_t i = 0; i < n_layers; ++i) {
        LinearLayer l;
        const int in = sizes[i];
        const int out = sizes[i + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        l.W.resize(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) l.W(r, c) = rng.uniform(-bound, bound);
        l.b = Vector::Zero(out);
        l.has_prelu = prelu[i];
        l.has_dropout = dropout[i];
        m.layers.push_back(std::move(l));
    }
    m.check_shapes();
    return m;
}

namespace {

constexpr char kMagic[8] = {'N', 'P', 'M', 'L', 'P', 'v', '0', '1'};

void write_f32_block(std::ofstream& f, const double* data, std::size_t n) {
    std::vector<float> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<float>(data[i]);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(4 * n));
}

void read_f32_block(std::ifstream& f, double* data, std::size_t n,
                    const std::filesystem::path& path) {
    std::vector<float> buf(n);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(4 * n));
    if (!f) throw std::runtime_error("truncated model file: " + path.string());
    for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<double>(buf[i]);
}

template <typename T>
void read_pod(std::ifstream& f, T& v, const std::filesystem::path& path) {
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw std::runtime_error("truncated model file: " + path.string());
}

} // namespace

void save_model(const MlpModel& m, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open model file for writing: " + path.string());
    f.write(kMagic, 8);
    const std::uint32_t n_layers = static_cast<std::uint32_t>(m.layers.size());
    const float p = static_cast<float>(m.dropout_p);
    const float scale = static_cast<float>(m.input_scale);
    f.write(reinterpret_cast<const char*>(&n_layers), 4);
    f.write(reinterpret_cast<const char*>(&p), 4);
    f.write(reinterpret_cast<const char*>(&scale), 4);
    f.write(reinterpret_cast<const char*>(&m.aux_hint), 4);
    for (const auto& l : m.layers) {
        const std::uint32_t in = static_cast<std::uint32_t>(l.in_size());
        const std::uint32_t out = static_cast<std::uint32_t>(l.out_size());
        const std::uint8_t has_prelu = l.has_prelu ? 1 : 0;
        const std::uint8_t has_dropout = l.has_dropout ? 1 : 0;
        const float slope = static_cast<float>(l.prelu_slope);
        f.write(reinterpret_cast<const char*>(&in), 4);
        f.write(reinterpret_cast<const char*>(&out), 4);
        f.write(reinterpret_cast<const char*>(&has_prelu), 1);
        f.write(reinterpret_cast<const char*>(&has_dropout), 1);
        f.write(reinterpret_cast<const char*>(&slope), 4);
        // row-major weight block
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> wr = l.W;
        write_f32_block(f, wr.data(), static_cast<std::size_t>(wr.size()));
        write_f32_block(f, l.b.data(), static_cast<std::size_t>(l.b.size()));
    }
    if (!f) throw std::runtime_error("model write failed: " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open model file: " + path.string());
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kMagic, 6) != 0)
        throw std::runtime_error("not a neuroplan model file: " + path.string());
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("unsupported model format version: " + path.string());

    std::uint32_t n_layers = 0;
    float p = 0.0f, scale = 1.0f;
    std::uint32_t aux = 0;
    read_pod(f, n_layers, path);
    read_pod(f, p, path);
    read_pod(f, scale, path);
    read_pod(f, aux, path);
    if (n_layers == 0 || n_layers > 64)
        throw std::runtime_error("implausible layer count in model file: " + path.string());

    MlpModel m;
    m.dropout_p = static_cast<double>(p);
    m.input_scale = static_cast<double>(scale);
    m.aux_hint = aux;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        std::uint32_t in = 0, out = 0;
        std::uint8_t has_prelu = 0, has_dropout = 0;
        float slope = 0.25f;
        read_pod(f, in, path);
        read_pod(f, out, path);
        read_pod(f, has_prelu, path);
        read_pod(f, has_dropout, path);
        read_pod(f, slope, path);
        LinearLayer l;
        l.has_prelu = has_prelu != 0;
        l.has_dropout = has_dropout != 0;
        l.prelu_slope = static_cast<double>(slope);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> wr(out, in);
        read_f32_block(f, wr.data(), static_cast<std::size_t>(wr.size()), path);
        l.W = wr;
        l.b.resize(out);
        read_f32_block(f, l.b.data(), static_cast<std::size_t>(l.b.size()), path);
        m.layers.push_back(std::move(l));
    }
    m.check_shapes();
    return m;
}

} // namespace neuroplan
