#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "purgelab/learners.hpp"
#include "purgelab/random.hpp"

namespace purgelab {

namespace {

struct MlpConfig {
  std::size_t hidden = 16;
  std::size_t epochs = 200;
  double rate = 0.1;
  std::uint64_t seed = 0;
};

// Numeric cells are min-max scaled with the training ranges (missing or
// undefined -> 0); categorical cells are one-hot (missing -> all zeros).
class InputEncoder {
 public:
  explicit InputEncoder(const Dataset& train) : ranges_(min_max_ranges(train)) {
    for (const auto& a : train.attributes()) {
      offsets_.push_back(width_);
      kinds_.push_back(a.kind);
      width_ += a.is_numeric() ? 1 : a.values.size();
    }
  }

  std::size_t width() const noexcept { return width_; }

  void encode(const Instance& inst, std::vector<double>& out) const {
    out.assign(width_, 0.0);
    for (std::size_t a = 0; a < kinds_.size(); ++a) {
      const double v = inst.values[a];
      if (is_missing(v)) continue;
      if (kinds_[a] == AttributeKind::categorical) {
        out[offsets_[a] + static_cast<std::size_t>(v)] = 1.0;
      } else if (ranges_[a] && ranges_[a]->width() > 0) {
        out[offsets_[a]] = (v - ranges_[a]->min) / ranges_[a]->width();
      }
    }
  }

 private:
  std::vector<std::optional<NumericRange>> ranges_;
  std::vector<std::size_t> offsets_;
  std::vector<AttributeKind> kinds_;
  std::size_t width_ = 0;
};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

class MlpModel : public Model {
 public:
  MlpModel(InputEncoder encoder, std::size_t hidden, std::size_t classes)
      : encoder_(std::move(encoder)),
        inputs_(encoder_.width()),
        hidden_(hidden),
        classes_(classes),
        w_hidden_(hidden * (inputs_ + 1)),
        w_output_(classes * (hidden + 1)) {}

  void initialise(Rng& rng) {
    for (auto& w : w_hidden_) w = rng.uniform(-0.5, 0.5);
    for (auto& w : w_output_) w = rng.uniform(-0.5, 0.5);
  }

  void train(const Dataset& data, const MlpConfig& config, Rng& rng) {
    std::vector<std::vector<double>> encoded(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) encoder_.encode(data.instance(i), encoded[i]);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> h(hidden_), out(classes_), delta_out(classes_), delta_hidden(hidden_);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      rng.shuffle(std::span<std::size_t>(order));
      for (const std::size_t i : order) {
        const auto& x = encoded[i];
        forward(x, h, out);
        for (std::size_t c = 0; c < classes_; ++c) {
          delta_out[c] = out[c] - (c == data.instance(i).label ? 1.0 : 0.0);
        }
        for (std::size_t j = 0; j < hidden_; ++j) {
          double back = 0.0;
          for (std::size_t c = 0; c < classes_; ++c) back += w_output_[c * (hidden_ + 1) + j] * delta_out[c];
          delta_hidden[j] = back * h[j] * (1.0 - h[j]);
        }
        for (std::size_t c = 0; c < classes_; ++c) {
          double* w = &w_output_[c * (hidden_ + 1)];
          for (std::size_t j = 0; j < hidden_; ++j) w[j] -= config.rate * delta_out[c] * h[j];
          w[hidden_] -= config.rate * delta_out[c];
        }
        for (std::size_t j = 0; j < hidden_; ++j) {
          double* w = &w_hidden_[j * (inputs_ + 1)];
          for (std::size_t k = 0; k < inputs_; ++k) w[k] -= config.rate * delta_hidden[j] * x[k];
          w[inputs_] -= config.rate * delta_hidden[j];
        }
      }
    }
  }

  ClassDistribution distribution(const Instance& instance) const override {
    std::vector<double> x, h(hidden_), out(classes_);
    encoder_.encode(instance, x);
    forward(x, h, out);
    return out;
  }

 private:
  void forward(const std::vector<double>& x, std::vector<double>& h, std::vector<double>& out) const {
    for (std::size_t j = 0; j < hidden_; ++j) {
      const double* w = &w_hidden_[j * (inputs_ + 1)];
      double z = w[inputs_];
      for (std::size_t k = 0; k < inputs_; ++k) z += w[k] * x[k];
      h[j] = logistic(z);
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes_; ++c) {
      const double* w = &w_output_[c * (hidden_ + 1)];
      double z = w[hidden_];
      for (std::size_t j = 0; j < hidden_; ++j) z += w[j] * h[j];
      out[c] = z;
      top = std::max(top, z);
    }
    double total = 0.0;
    for (auto& o : out) {
      o = std::exp(o - top);
      total += o;
    }
    for (auto& o : out) o /= total;
  }

  InputEncoder encoder_;
  std::size_t inputs_;
  std::size_t hidden_;
  std::size_t classes_;
  std::vector<double> w_hidden_;  // hidden x (inputs + bias)
  std::vector<double> w_output_;  // classes x (hidden + bias)
};

class ConstantModel : public Model {
 public:
  ConstantModel(std::size_t label, std::size_t classes) : dist_(classes, 0.0) { dist_[label] = 1.0; }
  ClassDistribution distribution(const Instance&) const override { return dist_; }

 private:
  ClassDistribution dist_;
};

class MlpLearner : public Learner {
 public:
  explicit MlpLearner(MlpConfig config) : config_(config) {}

  std::unique_ptr<Model> fit(const Dataset& train) const override {
    const auto counts = train.class_counts();
    if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) == 1) {
      const auto label = static_cast<std::size_t>(
          std::find_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) - counts.begin());
      return std::make_unique<ConstantModel>(label, train.class_count());
    }
    auto model = std::make_unique<MlpModel>(InputEncoder(train), config_.hidden, train.class_count());
    Rng rng(config_.seed);
    model->initialise(rng);
    model->train(train, config_, rng);
    return model;
  }

 private:
  MlpConfig config_;
};

}  // namespace

std::unique_ptr<Learner> make_mlp(const LearnerSpec& spec) {
  MlpConfig config;
  const long long hidden = hyper::get_int(spec, "hidden", 16);
  const long long epochs = hyper::get_int(spec, "epochs", 200);
  config.rate = hyper::get_real(spec, "rate", 0.1);
  if (hidden < 1) throw std::invalid_argument("mlp: hidden must be >= 1");
  if (epochs < 0) throw std::invalid_argument("mlp: epochs must be >= 0");
  if (!(config.rate > 0.0)) throw std::invalid_argument("mlp: rate must be positive");
  config.hidden = static_cast<std::size_t>(hidden);
  config.epochs = static_cast<std::size_t>(epochs);
  config.seed = spec.seed;
  return std::make_unique<MlpLearner>(config);
}

}  // namespace purgelab
