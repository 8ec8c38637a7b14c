#include "fcm/trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>

#include "fcm/error.hpp"
#include "fcm/fcmnet/checkpoint.hpp"

namespace fcm::train {

std::string to_string(AccessUnit u) { return u == AccessUnit::Iteration ? "iteration" : "epoch"; }

AccessUnit access_unit_from_string(const std::string& s) {
    if (s == "iteration") return AccessUnit::Iteration;
    if (s == "epoch") return AccessUnit::Epoch;
    throw ConfigError("unknown access unit '" + s + "' (expected iteration or epoch)");
}

void TrainConfig::validate() const {
    if (epochs == 0) throw ConfigError("train: epochs must be >= 1");
    if (batch_size == 0) throw ConfigError("train: batch size must be >= 1");
    if (!(lr > 0)) throw ConfigError("train: learning rate must be positive");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("train: Adam betas must be in [0,1)");
    if (checkpoint_every > 0 && checkpoint_dir.empty())
        throw ConfigError("train: checkpoint_every needs a checkpoint directory");
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "iteration,epoch,l_fore,l_det,l_c,seconds\n" << std::setprecision(9);
    auto cell = [&out](const std::optional<double>& v) {
        if (v) out << *v;
    };
    for (const auto& r : records) {
        out << r.iteration << ',' << r.epoch << ',';
        cell(r.l_fore);
        out << ',';
        cell(r.l_det);
        out << ',';
        cell(r.l_c);
        out << ',' << std::setprecision(4) << r.seconds << std::setprecision(9) << '\n';
    }
}

template <typename T>
nd::Var staged_total(nd::Tape<T>& tape, std::int64_t counter, std::int64_t access_point, const net::LossVars& losses) {
    std::optional<nd::Var> total;
    auto add = [&](const std::optional<nd::Var>& v) {
        if (!v) return;
        total = total ? tape.add(*total, *v) : *v;
    };
    add(losses.fore);
    add(losses.det);
    if (joint_loss_active(counter, access_point)) add(losses.joint);
    if (!total) throw ConfigError("staged_total: no losses recorded");
    return *total;
}

template <typename T>
TrainLog train(net::FcmModel<T>& model, const data::MultivariateSeries& series, const data::WindowPlan& plan,
               const TrainConfig& config, const IterationObserver<T>& observer) {
    config.validate();
    const auto& mcfg = model.config();
    if (config.ablation != mcfg.mode)
        throw ConfigError("train: ablation mode " + net::to_string(config.ablation) + " does not match model mode " +
                          net::to_string(mcfg.mode));
    if (plan.L != mcfg.L) throw ConfigError("train: window length does not match the model");
    if (series.channels() != mcfg.D) throw ConfigError("train: channel count does not match the model");
    if (plan.trainable_count == 0) throw ConfigError("train: no trainable windows (series shorter than 2L)");

    // Window tensors are materialized once in the model precision.
    std::vector<nd::Tensor<T>> obs, tgt;
    obs.reserve(plan.trainable_count);
    tgt.reserve(plan.trainable_count);
    for (std::size_t i = 0; i < plan.trainable_count; ++i) {
        auto w = data::slice_window(series, plan, i);
        obs.push_back(w.observation.template cast<T>());
        tgt.push_back(w.target->template cast<T>());
    }

    const std::size_t n = obs.size();
    const std::size_t per_epoch = (n + config.batch_size - 1) / config.batch_size;
    const std::size_t total_iters = per_epoch * config.epochs;

    TrainLog log;
    if (mcfg.has_joint_path()) {
        const std::int64_t horizon = config.access_unit == AccessUnit::Iteration
                                         ? static_cast<std::int64_t>(total_iters)
                                         : static_cast<std::int64_t>(config.epochs);
        if (config.access_point >= horizon - 1)
            log.warnings.push_back("access point " + std::to_string(config.access_point) +
                                   " is never passed; the joint loss stays inactive");
    }

    nd::AdamConfig adam{config.lr, config.beta1, config.beta2, config.adam_eps};
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(n);
    const auto t0 = std::chrono::steady_clock::now();
    bool joint_was_active = false;
    auto& store = model.params();
    store.clear_grad();

    std::size_t iter = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t q = 0; q < per_epoch; ++q, ++iter) {
            const std::int64_t counter =
                config.access_unit == AccessUnit::Iteration ? static_cast<std::int64_t>(iter)
                                                            : static_cast<std::int64_t>(epoch);
            const bool joint = mcfg.has_joint_path() && joint_loss_active(counter, config.access_point);
            if (joint && !joint_was_active && config.reset_adam_at_access) {
                for (auto& [name, p] : store) {
                    p.m.fill(T{0});
                    p.v.fill(T{0});
                    p.step = 0;
                }
            }
            joint_was_active = joint_was_active || joint;

            const std::size_t b0 = q * config.batch_size;
            const std::size_t b1 = std::min(n, b0 + config.batch_size);
            const T inv_batch = T{1} / static_cast<T>(b1 - b0);

            TrainRecord rec;
            rec.iteration = iter;
            rec.epoch = epoch;
            double sum_fore = 0, sum_det = 0, sum_c = 0;
            try {
                nd::Tape<T> tape(&store);
                std::optional<nd::Var> batch_total;
                for (std::size_t b = b0; b < b1; ++b) {
                    const std::size_t w = order[b];
                    net::LossVars losses = model.compute_losses(tape, obs[w], &tgt[w], joint);
                    if (losses.fore) sum_fore += tape.value(*losses.fore).item();
                    if (losses.det) sum_det += tape.value(*losses.det).item();
                    if (losses.joint) sum_c += tape.value(*losses.joint).item();
                    nd::Var total = staged_total(tape, counter, config.access_point, losses);
                    batch_total = batch_total ? tape.add(*batch_total, total) : total;
                }
                tape.backward(tape.scale(*batch_total, inv_batch));
            } catch (const NumericError& e) {
                throw NumericError("training diverged at iteration " + std::to_string(iter) + " (epoch " +
                                   std::to_string(epoch) + "): " + e.what());
            }
            const double inv = 1.0 / static_cast<double>(b1 - b0);
            if (mcfg.has_variate_path()) rec.l_fore = sum_fore * inv;
            if (mcfg.has_time_path()) rec.l_det = sum_det * inv;
            if (joint) rec.l_c = sum_c * inv;
            for (const auto& v : {rec.l_fore, rec.l_det, rec.l_c})
                if (v && !std::isfinite(*v))
                    throw NumericError("training diverged at iteration " + std::to_string(iter) + ": loss is not finite");

            if (observer) observer(IterationInfo{iter, epoch, joint}, store);
            nd::adam_step(store, adam);

            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            log.records.push_back(rec);

            if (config.checkpoint_every > 0 && (iter + 1) % config.checkpoint_every == 0) {
                model.mark_trained();
                net::save_checkpoint(config.checkpoint_dir / ("iter_" + std::to_string(iter + 1) + ".ckpt"), model);
            }
        }
    }
    model.mark_trained();
    return log;
}

template nd::Var staged_total<float>(nd::Tape<float>&, std::int64_t, std::int64_t, const net::LossVars&);
template nd::Var staged_total<double>(nd::Tape<double>&, std::int64_t, std::int64_t, const net::LossVars&);
template TrainLog train<float>(net::FcmModel<float>&, const data::MultivariateSeries&, const data::WindowPlan&,
                               const TrainConfig&, const IterationObserver<float>&);
template TrainLog train<double>(net::FcmModel<double>&, const data::MultivariateSeries&, const data::WindowPlan&,
                                const TrainConfig&, const IterationObserver<double>&);

}  // namespace fcm::train
