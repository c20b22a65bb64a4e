#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "shield/datamodel.hpp"
#include "shield/detectors/threshold.hpp"
#include "shield/rng.hpp"

namespace shield {

/// Dense autoencoder / variational autoencoder trained by mini-batch gradient
/// descent with manual backpropagation. Hidden activations are tanh, outputs
/// linear. Parameters live in one flat vector so gradients can be checked
/// against finite differences.
///
/// AE: one chain input -> hidden -> latent -> hidden -> input (tanh on every
/// intermediate layer). VAE: encoder chain input -> hidden (tanh), linear
/// (mu, logvar) heads, decoder latent -> hidden (tanh) -> input (linear).
/// Loss per sample: mean squared reconstruction error over dims, plus for the
/// VAE the KL term -1/2 sum_d (1 + logvar - mu^2 - var). Batch loss is the
/// mean over samples.
class NeuralNet {
public:
    NeuralNet() = default;

    NeuralNet(int input_dim, int hidden, int latent, bool vae, std::uint64_t seed)
        : vae_(vae), input_(input_dim), hidden_(hidden), latent_(latent) {
        if (vae_) {
            layer_dims_ = {{input_, hidden}, {hidden, latent}, {hidden, latent},
                           {latent, hidden}, {hidden, input_}};
        } else {
            layer_dims_ = {{input_, hidden}, {hidden, latent}, {latent, hidden}, {hidden, input_}};
        }
        std::size_t total = 0;
        for (auto [in, out] : layer_dims_) total += static_cast<std::size_t>(in + 1) * out;
        params_.resize(total);
        CounterRng rng(seed);
        for (auto& p : params_) p = rng.uniform(-0.05, 0.05);
    }

    bool is_vae() const { return vae_; }
    int input_dim() const { return input_; }
    int latent_dim() const { return latent_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    /// Batch loss; for the VAE, `eps` supplies one noise row per sample
    /// (n x latent) for the reparameterization z = mu + sigma * eps.
    double loss(const FeatureMatrix& X, const std::vector<double>& eps) const {
        double total = 0.0;
        Workspace ws;
        for (std::size_t r = 0; r < X.rows(); ++r)
            total += forward(X.row_ptr(r), eps.empty() ? nullptr : &eps[r * latent_], ws);
        return total / static_cast<double>(X.rows());
    }

    /// Analytic gradient of the batch loss with respect to the flat parameter
    /// vector.
    std::vector<double> gradient(const FeatureMatrix& X, const std::vector<double>& eps) const {
        std::vector<double> grad(params_.size(), 0.0);
        Workspace ws;
        for (std::size_t r = 0; r < X.rows(); ++r)
            backward(X.row_ptr(r), eps.empty() ? nullptr : &eps[r * latent_], ws, grad);
        double inv = 1.0 / static_cast<double>(X.rows());
        for (auto& g : grad) g *= inv;
        return grad;
    }

    /// Per-row mean squared reconstruction error; the VAE decodes from mu.
    std::vector<double> reconstruction_error(const FeatureMatrix& X) const {
        std::vector<double> out(X.rows());
        Workspace ws;
        for (std::size_t r = 0; r < X.rows(); ++r) {
            forward(X.row_ptr(r), nullptr, ws);
            out[r] = ws.mse;
        }
        return out;
    }

    const std::vector<double>& epoch_losses() const { return epoch_losses_; }

    /// Mini-batch gradient descent. The loss is monitored on the fixed full
    /// batch (VAE measured at eps = 0) each epoch; on an increase the epoch is
    /// rolled back and the learning rate halves.
    void train(const FeatureMatrix& X, int epochs, int batch_size, double lr, std::uint64_t seed) {
        CounterRng master(seed ^ 0x7EA1ULL);
        std::size_t n = X.rows();
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::vector<double> no_eps;
        double prev_loss = loss(X, no_eps);
        epoch_losses_.push_back(prev_loss);

        for (int epoch = 0; epoch < epochs; ++epoch) {
            std::vector<double> snapshot = params_;
            CounterRng rng = master.derive(static_cast<std::uint64_t>(epoch));
            rng.shuffle(order);
            for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
                std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
                std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(end));
                FeatureMatrix Xb = X.select_rows(batch);
                std::vector<double> eps;
                if (vae_) {
                    eps.resize(batch.size() * static_cast<std::size_t>(latent_));
                    for (auto& e : eps) e = rng.gaussian();
                }
                auto grad = gradient(Xb, eps);
                for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= lr * grad[i];
            }
            double cur = loss(X, no_eps);
            if (std::isnan(cur))
                throw DetectorError(
                    "neural training diverged to NaN loss; lower the learning rate");
            if (cur > prev_loss) {
                params_ = snapshot;  // roll back, try again slower
                lr *= 0.5;
                cur = prev_loss;
            }
            prev_loss = cur;
            epoch_losses_.push_back(cur);
        }
    }

private:
    struct Workspace {
        // Per-layer pre-activations and activations, reused across rows.
        std::vector<std::vector<double>> act;
        std::vector<double> mu, logvar, z;
        double mse = 0.0, kl = 0.0;
    };

    // Layer parameter block: weights row-major (out x in), then biases.
    std::size_t layer_offset(std::size_t layer) const {
        std::size_t off = 0;
        for (std::size_t i = 0; i < layer; ++i)
            off += static_cast<std::size_t>(layer_dims_[i].first + 1) * layer_dims_[i].second;
        return off;
    }

    void apply_layer(std::size_t layer, const std::vector<double>& in, std::vector<double>& out,
                     bool tanh_act) const {
        auto [din, dout] = layer_dims_[layer];
        const double* W = params_.data() + layer_offset(layer);
        const double* b = W + static_cast<std::size_t>(din) * dout;
        out.assign(static_cast<std::size_t>(dout), 0.0);
        for (int o = 0; o < dout; ++o) {
            double s = b[o];
            const double* wrow = W + static_cast<std::size_t>(o) * din;
            for (int i = 0; i < din; ++i) s += wrow[i] * in[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(o)] = tanh_act ? std::tanh(s) : s;
        }
    }

    // Accumulates dL/dW into grad and returns dL/d(input) given dL/d(output
    // activation); delta must already account for the activation derivative.
    void layer_backward(std::size_t layer, const std::vector<double>& in,
                        const std::vector<double>& delta, std::vector<double>& grad,
                        std::vector<double>& d_in) const {
        auto [din, dout] = layer_dims_[layer];
        std::size_t off = layer_offset(layer);
        double* gW = grad.data() + off;
        double* gb = gW + static_cast<std::size_t>(din) * dout;
        const double* W = params_.data() + off;
        d_in.assign(static_cast<std::size_t>(din), 0.0);
        for (int o = 0; o < dout; ++o) {
            double dl = delta[static_cast<std::size_t>(o)];
            gb[o] += dl;
            double* gw = gW + static_cast<std::size_t>(o) * din;
            const double* wrow = W + static_cast<std::size_t>(o) * din;
            for (int i = 0; i < din; ++i) {
                gw[i] += dl * in[static_cast<std::size_t>(i)];
                d_in[static_cast<std::size_t>(i)] += dl * wrow[i];
            }
        }
    }

    /// Returns the per-sample loss and fills the workspace with every
    /// intermediate needed by backward. A null eps means eps = 0 (the VAE
    /// decodes from mu), which is also the AE path.
    double forward(const double* row, const double* eps, Workspace& ws) const {
        std::vector<double> x(row, row + input_);
        ws.act.clear();
        ws.act.push_back(x);
        if (!vae_) {
            std::vector<double> h;
            for (std::size_t l = 0; l < layer_dims_.size(); ++l) {
                bool last = l + 1 == layer_dims_.size();
                apply_layer(l, ws.act.back(), h, !last);
                ws.act.push_back(h);
            }
        } else {
            std::vector<double> h;
            apply_layer(0, ws.act.back(), h, true);  // encoder hidden
            ws.act.push_back(h);
            apply_layer(1, ws.act.back(), ws.mu, false);
            apply_layer(2, ws.act[1], ws.logvar, false);
            ws.z.assign(static_cast<std::size_t>(latent_), 0.0);
            for (int k = 0; k < latent_; ++k) {
                double sigma = std::exp(0.5 * ws.logvar[static_cast<std::size_t>(k)]);
                double e = eps ? eps[k] : 0.0;
                ws.z[static_cast<std::size_t>(k)] = ws.mu[static_cast<std::size_t>(k)] + sigma * e;
            }
            ws.act.push_back(ws.z);
            apply_layer(3, ws.act.back(), h, true);  // decoder hidden
            ws.act.push_back(h);
            apply_layer(4, ws.act.back(), h, false);
            ws.act.push_back(h);
        }
        const auto& xhat = ws.act.back();
        double mse = 0.0;
        for (int i = 0; i < input_; ++i) {
            double diff = xhat[static_cast<std::size_t>(i)] - row[i];
            mse += diff * diff;
        }
        ws.mse = mse / static_cast<double>(input_);
        ws.kl = 0.0;
        if (vae_) {
            for (int k = 0; k < latent_; ++k) {
                double mu = ws.mu[static_cast<std::size_t>(k)];
                double lv = ws.logvar[static_cast<std::size_t>(k)];
                ws.kl += -0.5 * (1.0 + lv - mu * mu - std::exp(lv));
            }
        }
        return ws.mse + ws.kl;
    }

    void backward(const double* row, const double* eps, Workspace& ws,
                  std::vector<double>& grad) const {
        forward(row, eps, ws);
        const auto& xhat = ws.act.back();
        std::vector<double> delta(static_cast<std::size_t>(input_));
        for (int i = 0; i < input_; ++i)
            delta[static_cast<std::size_t>(i)] =
                2.0 * (xhat[static_cast<std::size_t>(i)] - row[i]) / static_cast<double>(input_);

        std::vector<double> d_in;
        if (!vae_) {
            for (std::size_t l = layer_dims_.size(); l-- > 0;) {
                layer_backward(l, ws.act[l], delta, grad, d_in);
                if (l > 0) {
                    // act[l] = tanh(pre); d tanh = 1 - act^2
                    delta.assign(d_in.size(), 0.0);
                    for (std::size_t i = 0; i < d_in.size(); ++i)
                        delta[i] = d_in[i] * (1.0 - ws.act[l][i] * ws.act[l][i]);
                }
            }
        } else {
            // act layout: [x, enc_hidden, z, dec_hidden, xhat]
            layer_backward(4, ws.act[3], delta, grad, d_in);
            delta.assign(d_in.size(), 0.0);
            for (std::size_t i = 0; i < d_in.size(); ++i)
                delta[i] = d_in[i] * (1.0 - ws.act[3][i] * ws.act[3][i]);
            layer_backward(3, ws.act[2], delta, grad, d_in);  // d_in = dL/dz

            std::vector<double> d_mu(static_cast<std::size_t>(latent_));
            std::vector<double> d_lv(static_cast<std::size_t>(latent_));
            for (int k = 0; k < latent_; ++k) {
                auto ks = static_cast<std::size_t>(k);
                double mu = ws.mu[ks], lv = ws.logvar[ks];
                double e = eps ? eps[k] : 0.0;
                double sigma = std::exp(0.5 * lv);
                d_mu[ks] = d_in[ks] + mu;                                  // + dKL/dmu
                d_lv[ks] = d_in[ks] * 0.5 * sigma * e + 0.5 * (std::exp(lv) - 1.0);
            }
            std::vector<double> d_hidden_mu, d_hidden_lv;
            layer_backward(1, ws.act[1], d_mu, grad, d_hidden_mu);
            layer_backward(2, ws.act[1], d_lv, grad, d_hidden_lv);
            delta.assign(d_hidden_mu.size(), 0.0);
            for (std::size_t i = 0; i < delta.size(); ++i)
                delta[i] = (d_hidden_mu[i] + d_hidden_lv[i]) *
                           (1.0 - ws.act[1][i] * ws.act[1][i]);
            layer_backward(0, ws.act[0], delta, grad, d_in);
        }
    }

    bool vae_ = false;
    int input_ = 0, hidden_ = 0, latent_ = 0;
    std::vector<std::pair<int, int>> layer_dims_;  // (in, out) per layer
    std::vector<double> params_;
    std::vector<double> epoch_losses_;
};

/// KL divergence of a diagonal Gaussian (mu, logvar) from the unit Gaussian.
inline double gaussian_kl(const std::vector<double>& mu, const std::vector<double>& logvar) {
    double kl = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k)
        kl += -0.5 * (1.0 + logvar[k] - mu[k] * mu[k] - std::exp(logvar[k]));
    return kl;
}

struct NeuralModel {
    NeuralNet net;
    double train_threshold = 0.0;  // percentile of training reconstruction errors
};

/// Fit an AE or VAE on (minmax-scaled) rows treated as normal.
inline NeuralModel neural_fit(const FeatureMatrix& X, const DetectorSpec& spec) {
    if (X.rows() == 0) throw DetectorError("neural_fit: empty training set");
    bool vae = spec.family == DetectorFamily::VAE;
    NeuralModel model;
    model.net = NeuralNet(static_cast<int>(X.cols()), spec.hidden_width, spec.latent_dim, vae,
                          spec.seed);
    model.net.train(X, spec.epochs, spec.batch_size, 0.01, spec.seed);
    model.train_threshold =
        nearest_rank_percentile(model.net.reconstruction_error(X), spec.threshold_percentile);
    return model;
}

}  // namespace shield
