#include "neuroplan/cae.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace neuroplan {

void CaeSpec::validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("cae: dim must be 2 or 3");
    if (lambda <= 0.0) throw std::invalid_argument("cae: lambda must be positive");
    if (cloud_size <= 0) throw std::invalid_argument("cae: cloud size must be positive");
}

MlpModel make_cae_encoder(const CaeSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<int> sizes{spec.input_size()};
    for (int h : spec.encoder_hidden()) sizes.push_back(h);
    sizes.push_back(spec.latent_size());
    const std::size_t n = sizes.size() - 1;
    std::vector<bool> prelu(n, true);
    prelu.back() = false; // linear latent head
    std::vector<bool> dropout(n, false);
    MlpModel m = make_mlp(sizes, prelu, dropout, 0.0, mix_seed(seed, "cae_encoder"));
    m.input_scale = kCoordScale;
    return m;
}

MlpModel make_cae_decoder(const CaeSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<int> sizes{spec.latent_size()};
    auto hidden = spec.encoder_hidden();
    std::reverse(hidden.begin(), hidden.end());
    for (int h : hidden) sizes.push_back(h);
    sizes.push_back(spec.input_size());
    const std::size_t n = sizes.size() - 1;
    std::vector<bool> prelu(n, true);
    prelu.back() = false;
    std::vector<bool> dropout(n, false);
    MlpModel m = make_mlp(sizes, prelu, dropout, 0.0, mix_seed(seed, "cae_decoder"));
    m.input_scale = kCoordScale;
    return m;
}

Vector flatten_cloud(const PointCloud& pc, double scale) {
    Vector v(pc.points.size());
    for (int i = 0; i < pc.size(); ++i)
        for (int k = 0; k < pc.dim; ++k) v(i * pc.dim + k) = pc.points(i, k) * scale;
    return v;
}

Matrix flatten_clouds(const std::vector<PointCloud>& clouds, double scale) {
    if (clouds.empty()) throw std::invalid_argument("flatten_clouds: empty list");
    const auto cols = clouds.front().points.size();
    Matrix X(static_cast<Eigen::Index>(clouds.size()), cols);
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        if (clouds[i].points.size() != cols)
            throw std::invalid_argument("flatten_clouds: inconsistent cloud sizes");
        X.row(static_cast<Eigen::Index>(i)) = flatten_cloud(clouds[i], scale).transpose();
    }
    return X;
}

Vector encode(const MlpModel& encoder, const PointCloud& pc) {
    const Vector x = flatten_cloud(pc, encoder.input_scale);
    if (x.size() != encoder.input_size())
        throw std::invalid_argument("encode: cloud size does not match encoder input");
    return forward(encoder, x, Mode::eval_deterministic);
}

double encoder_weight_sq_sum(const MlpModel& encoder) {
    double s = 0.0;
    for (const auto& l : encoder.layers) s += l.W.squaredNorm();
    return s;
}

double reconstruction_mse(const MlpModel& encoder, const MlpModel& decoder,
                          const Matrix& batch) {
    const Matrix latent = forward_batch(encoder, batch, Mode::eval_deterministic, nullptr);
    const Matrix recon = forward_batch(decoder, latent, Mode::eval_deterministic, nullptr);
    return (recon - batch).rowwise().squaredNorm().mean();
}

double batch_variance(const Matrix& batch) {
    const Vector mean = batch.colwise().mean();
    return (batch.rowwise() - mean.transpose()).rowwise().squaredNorm().mean();
}

double cae_loss(const MlpModel& encoder, const MlpModel& decoder, const Matrix& batch,
                double lambda) {
    if (batch.rows() == 0) throw std::invalid_argument("cae_loss: empty batch");
    return reconstruction_mse(encoder, decoder, batch) + lambda * encoder_weight_sq_sum(encoder);
}

TrainReport train_cae(const CaeSpec& spec, const std::vector<PointCloud>& clouds,
                      const TrainOptions& opts, MlpModel& encoder, MlpModel& decoder) {
    spec.validate();
    if (clouds.size() < 2) throw std::invalid_argument("train_cae: need at least 2 clouds");

    encoder = make_cae_encoder(spec, opts.seed);
    decoder = make_cae_decoder(spec, opts.seed);
    const Matrix data = flatten_clouds(clouds, encoder.input_scale);

    AdagradState enc_state = AdagradState::for_model(encoder, opts.learning_rate);
    AdagradState dec_state = AdagradState::for_model(decoder, opts.learning_rate);
    Rng rng(mix_seed(opts.seed, "cae_train"));

    TrainReport report;
    report.learning_rate = opts.learning_rate;
    report.lambda = spec.lambda;
    if (opts.verbose)
        std::fprintf(stderr, "[train-cae] dim=%d latent=%d lambda=%g lr=%g batch=%d\n", spec.dim,
                     spec.latent_size(), spec.lambda, opts.learning_rate, opts.batch_size);

    const int n = static_cast<int>(data.rows());
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
            Matrix X(bs, data.cols());
            for (int i = 0; i < bs; ++i)
                X.row(i) = data.row(order[static_cast<std::size_t>(begin + i)]);

            ForwardCache enc_cache, dec_cache;
            const Matrix latent = forward_batch(encoder, X, Mode::train, &rng, &enc_cache);
            const Matrix recon = forward_batch(decoder, latent, Mode::train, &rng, &dec_cache);

            const double recon_loss = (recon - X).rowwise().squaredNorm().mean();
            epoch_loss += recon_loss + spec.lambda * encoder_weight_sq_sum(encoder);
            ++batches;

            const Matrix dRecon = 2.0 / bs * (recon - X);
            Matrix dLatent;
            Gradients dec_grads = backward(decoder, dec_cache, dRecon, &dLatent);
            Gradients enc_grads = backward(encoder, enc_cache, dLatent);
            for (std::size_t li = 0; li < encoder.layers.size(); ++li)
                enc_grads.dW[li] += 2.0 * spec.lambda * encoder.layers[li].W;

            adagrad_step(decoder, dec_grads, dec_state);
            adagrad_step(encoder, enc_grads, enc_state);
        }
        epoch_loss /= batches;
        report.loss_curve.push_back(epoch_loss);
        report.epochs_run = epoch + 1;
        if (opts.verbose && (epoch % 10 == 0 || epoch + 1 == opts.epochs))
            std::fprintf(stderr, "[train-cae] epoch=%d loss=%.6f\n", epoch, epoch_loss);
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train_cae: loss diverged to non-finite value");

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
