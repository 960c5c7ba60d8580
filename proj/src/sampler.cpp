#include "neuroplan/sampler.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace neuroplan {

void SamplerSpec::validate() const {
    if (config_dim < 2 || config_dim > 3)
        throw std::invalid_argument("sampler: config_dim must be 2 or 3");
    if (latent_size < 0) throw std::invalid_argument("sampler: latent_size must be >= 0");
    if (hidden.empty()) throw std::invalid_argument("sampler: need hidden layers");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw std::invalid_argument("sampler: dropout p must lie in [0,1)");
}

MlpModel make_sampler_model(const SamplerSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<int> sizes{spec.input_size()};
    for (int h : spec.hidden) sizes.push_back(h);
    sizes.push_back(spec.config_dim);

    const std::size_t n = sizes.size() - 1;
    std::vector<bool> prelu(n, true);
    prelu.back() = false; // linear output
    std::vector<bool> dropout(n, true);
    dropout[n - 1] = false; // output layer
    dropout[n - 2] = false; // last hidden layer carries no dropout
    MlpModel m = make_mlp(sizes, prelu, dropout, spec.dropout_p, mix_seed(seed, "sampler"));
    m.input_scale = kCoordScale;
    return m;
}

namespace {

Vector build_input(const Vector& latent, const Config& x_t, const Config& x_goal,
                   double scale) {
    const int d = x_t.dim;
    Vector in(latent.size() + 2 * d);
    in.head(latent.size()) = latent;
    for (int i = 0; i < d; ++i) {
        in(latent.size() + i) = x_t[i] * scale;
        in(latent.size() + d + i) = x_goal[i] * scale;
    }
    return in;
}

} // namespace

Config next_sample(const MlpModel& m, const Vector& latent, const Config& x_t,
                   const Config& x_goal, const std::array<double, 3>& bounds, Rng& rng,
                   Mode mode) {
    if (x_t.dim != x_goal.dim)
        throw std::invalid_argument("next_sample: start/goal dimension mismatch");
    const Vector in = build_input(latent, x_t, x_goal, m.input_scale);
    if (in.size() != m.input_size())
        throw std::invalid_argument("next_sample: input size does not match model");
    const Vector out = forward(m, in, mode, &rng);
    if (out.size() != x_t.dim)
        throw std::invalid_argument("next_sample: model output size does not match config dim");

    Config q;
    q.dim = x_t.dim;
    for (int i = 0; i < q.dim; ++i) {
        const double b = bounds[static_cast<std::size_t>(i)];
        q[i] = std::clamp(out(i) / m.input_scale, -b, b);
    }
    return q;
}

PairDataset make_training_pairs(const std::vector<TrainingPath>& paths,
                                const std::map<std::uint64_t, Vector>& latents,
                                const SamplerSpec& spec) {
    spec.validate();
    const int d = spec.config_dim;
    const int zl = spec.latent_size;

    std::size_t total = 0;
    int dropped = 0;
    for (const auto& p : paths) {
        if (p.states.size() < 2) {
            ++dropped;
            continue;
        }
        total += p.states.size() - 1;
    }
    if (dropped > 0)
        std::fprintf(stderr, "[pairs] warning: dropped %d path(s) shorter than 2 states\n",
                     dropped);

    PairDataset ds;
    ds.config_dim = d;
    ds.latent_size = zl;
    ds.dropped_paths = dropped;
    ds.inputs.resize(static_cast<Eigen::Index>(total), zl + 2 * d);
    ds.targets.resize(static_cast<Eigen::Index>(total), d);

    Eigen::Index row = 0;
    for (const auto& p : paths) {
        if (p.states.size() < 2) continue;
        ds.longest_path = std::max(ds.longest_path, static_cast<int>(p.states.size()));
        Vector z;
        if (zl > 0) {
            const auto it = latents.find(p.workspace_seed);
            if (it == latents.end())
                throw std::invalid_argument("make_training_pairs: no latent for workspace");
            if (it->second.size() != zl)
                throw std::invalid_argument("make_training_pairs: latent size mismatch");
            z = it->second;
        } else {
            z = Vector(0);
        }
        const Config goal = p.states.back();
        for (std::size_t i = 0; i + 1 < p.states.size(); ++i) {
            ds.inputs.row(row) = build_input(z, p.states[i], goal, kCoordScale).transpose();
            for (int k = 0; k < d; ++k) ds.targets(row, k) = p.states[i + 1][k] * kCoordScale;
            ++row;
        }
    }
    return ds;
}

double sampler_loss(const MlpModel& m, const Matrix& inputs, const Matrix& targets) {
    if (inputs.rows() == 0) throw std::invalid_argument("sampler_loss: empty batch");
    const Matrix pred = forward_batch(m, inputs, Mode::eval_deterministic, nullptr);
    return (pred - targets).rowwise().squaredNorm().mean();
}

TrainReport train_sampler(const SamplerSpec& spec, const PairDataset& dataset,
                          const TrainOptions& opts, MlpModel& model) {
    spec.validate();
    if (dataset.size() == 0) throw std::invalid_argument("train_sampler: empty dataset");
    if (dataset.inputs.cols() != spec.input_size() || dataset.targets.cols() != spec.config_dim)
        throw std::invalid_argument("train_sampler: dataset shape does not match spec");

    model = make_sampler_model(spec, opts.seed);
    model.aux_hint = static_cast<std::uint32_t>(std::max(dataset.longest_path, 0));
    AdagradState state = AdagradState::for_model(model, opts.learning_rate);
    Rng rng(mix_seed(opts.seed, "sampler_train"));

    TrainReport report;
    report.learning_rate = opts.learning_rate;
    if (opts.verbose)
        std::fprintf(stderr, "[train-sampler] d=%d latent=%d pairs=%ld p=%g lr=%g batch=%d\n",
                     spec.config_dim, spec.latent_size, static_cast<long>(dataset.size()),
                     spec.dropout_p, opts.learning_rate, opts.batch_size);

    const int n = static_cast<int>(dataset.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    double best = std::numeric_limits<double>::infinity();
    int stale = 0;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        double epoch_loss = 0.0;
        int batches = 0;
        for (int begin = 0; begin < n; begin += opts.batch_size) {
            const int bs = std::min(opts.batch_size, n - begin);
            Matrix X(bs, dataset.inputs.cols());
            Matrix Y(bs, dataset.targets.cols());
            for (int i = 0; i < bs; ++i) {
                X.row(i) = dataset.inputs.row(order[static_cast<std::size_t>(begin + i)]);
                Y.row(i) = dataset.targets.row(order[static_cast<std::size_t>(begin + i)]);
            }
            ForwardCache cache;
            const Matrix pred = forward_batch(model, X, Mode::train, &rng, &cache);
            epoch_loss += (pred - Y).rowwise().squaredNorm().mean();
            ++batches;

            const Matrix dPred = 2.0 / bs * (pred - Y);
            Gradients grads = backward(model, cache, dPred);
            adagrad_step(model, grads, state);
        }
        epoch_loss /= batches;
        report.loss_curve.push_back(epoch_loss);
        report.epochs_run = epoch + 1;
        if (opts.verbose && (epoch % 5 == 0 || epoch + 1 == opts.epochs))
            std::fprintf(stderr, "[train-sampler] epoch=%d loss=%.6f\n", epoch, epoch_loss);
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train_sampler: loss diverged to non-finite value");

        if (epoch_loss < best * (1.0 - opts.min_rel_improve)) {
            best = epoch_loss;
            stale = 0;
        } else {
            best = std::min(best, epoch_loss);
            if (++stale >= opts.patience) break;
        }
    }
    return report;
}

} // namespace neuroplan
