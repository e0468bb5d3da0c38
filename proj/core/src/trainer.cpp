#include "longrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "longrl/advantage.hpp"
#include "longrl/entropy.hpp"
#include "longrl/rng.hpp"

namespace longrl {

namespace {

constexpr std::string_view kParamsMagic = "longrl-params v1";

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Nearest-rank percentile on a copy of the values.
double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) {
    throw std::invalid_argument("percentile of empty set");
  }
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::min(std::max<std::size_t>(rank, 1), xs.size());
  return xs[rank - 1];
}

}  // namespace

void save_params(const ParamsSnapshot& snapshot,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write params file: " + path.string());
  }
  out << kParamsMagic << '\n';
  out << "step " << snapshot.step << '\n';
  out << "aepo_mode " << to_string(snapshot.aepo_mode) << '\n';
  out << "feature_dim " << snapshot.params.feature_dim << '\n';
  out << "vocab_size " << snapshot.params.vocab_size << '\n';
  for (int f = 0; f < snapshot.params.feature_dim; ++f) {
    for (int v = 0; v < snapshot.params.vocab_size; ++v) {
      out << (v == 0 ? "" : " ") << format_double(snapshot.params.at(f, v));
    }
    out << '\n';
  }
}

ParamsSnapshot load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open params file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != kParamsMagic) {
    throw std::runtime_error("unrecognized params file header");
  }
  ParamsSnapshot snapshot;
  std::string word;
  std::string mode_name;
  in >> word >> snapshot.step;
  if (word != "step") {
    throw std::runtime_error("malformed params file");
  }
  in >> word >> mode_name;
  if (word != "aepo_mode") {
    throw std::runtime_error("malformed params file");
  }
  const auto mode = aepo_mode_from_string(mode_name);
  if (!mode) {
    throw std::runtime_error("unknown aepo mode in params file");
  }
  snapshot.aepo_mode = *mode;
  int feature_dim = 0;
  int vocab_size = 0;
  in >> word >> feature_dim;
  if (word != "feature_dim") {
    throw std::runtime_error("malformed params file");
  }
  in >> word >> vocab_size;
  if (word != "vocab_size") {
    throw std::runtime_error("malformed params file");
  }
  snapshot.params = zero_params(feature_dim, vocab_size);
  for (double& x : snapshot.params.theta) {
    if (!(in >> x)) {
      throw std::runtime_error("truncated params file");
    }
  }
  return snapshot;
}

Trainer::Trainer(RunConfig config) : config_(std::move(config)) {
  validate(config_);

  for (const TaskKind kind : config_.env.tasks) {
    for (int i = 0; i < config_.samples_per_task; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "/%05d", i);
      IndexEntry entry;
      entry.sample_id = std::string(to_string(kind)) + buf;
      entry.task = kind;
      index_.entries.push_back(entry);
      task_of_id_[index_.entries.back().sample_id] = kind;
    }
  }

  const auto n_tasks = static_cast<int>(config_.env.tasks.size());
  if (config_.sampler == SamplerKind::balanced) {
    const int quota = config_.batch_groups / n_tasks;
    batches_per_epoch_ =
        static_cast<std::size_t>(config_.samples_per_task / quota);
  } else {
    batches_per_epoch_ = index_.entries.size() /
                         static_cast<std::size_t>(config_.batch_groups);
  }
  if (batches_per_epoch_ == 0) {
    throw ConfigError("dataset too small: no full batch per epoch");
  }

  params_ = zero_params(config_.env.feature_dim, config_.env.vocab_size);
  if (config_.aepo.has_value()) {
    aepo_ = make_aepo_state(config_.aepo->h_low, config_.aepo->h_high);
  } else {
    aepo_ = AepoState{};  // (0, inf): controller never leaves keep-negatives
  }

  if (config_.init_params.has_value()) {
    ParamsSnapshot snapshot = load_params(*config_.init_params);
    if (snapshot.params.feature_dim != config_.env.feature_dim ||
        snapshot.params.vocab_size != config_.env.vocab_size) {
      throw ConfigError("init_params shape does not match env config");
    }
    params_ = std::move(snapshot.params);
    step_ = snapshot.step;
    aepo_.mode = snapshot.aepo_mode;
  }

  mask_mode_.kind = config_.mask_kind;
  resolve_mask_thresholds();
  mask_mode_.tau_token = config_.tau_token.value_or(0.0);
  mask_mode_.tau_sequence = config_.tau_sequence.value_or(0.0);
}

int Trainer::stage_index_for(std::int64_t step) const {
  std::int64_t cum = 0;
  for (std::size_t i = 0; i < config_.curriculum.size(); ++i) {
    const int budget = config_.curriculum[i].steps;
    if (budget <= 0) {
      return static_cast<int>(i);  // open-ended stage consumes the rest
    }
    cum += budget;
    if (step < cum) {
      return static_cast<int>(i);
    }
  }
  return static_cast<int>(config_.curriculum.size()) - 1;
}

Trainer::DrawnBatch Trainer::draw_batch(std::int64_t step) {
  const StageLimits& stage =
      config_.curriculum[static_cast<std::size_t>(stage_index_for(step))];

  const auto epoch = static_cast<std::int64_t>(
      static_cast<std::uint64_t>(step) / batches_per_epoch_);
  if (epoch != cached_epoch_) {
    const std::uint64_t epoch_seed = derive_seed(
        config_.seed, {fnv1a64("epoch"), static_cast<std::uint64_t>(epoch)});
    epoch_batches_ = config_.sampler == SamplerKind::balanced
                         ? balanced_batches(index_, config_.batch_groups, epoch_seed)
                         : shuffled_batches(index_, config_.batch_groups, epoch_seed);
    cached_epoch_ = epoch;
  }
  const auto pos = static_cast<std::size_t>(
      static_cast<std::uint64_t>(step) % batches_per_epoch_);
  const std::vector<std::string>& ids = epoch_batches_[pos];

  DrawnBatch drawn;
  drawn.batch.step = step;
  drawn.tasks.reserve(ids.size());
  drawn.batch.groups.reserve(ids.size());
  for (std::size_t g = 0; g < ids.size(); ++g) {
    const std::string& id = ids[g];
    EnvTask task = generate_task(
        config_.env, task_of_id_.at(id), stage,
        derive_seed(config_.seed, {fnv1a64("sample"), fnv1a64(id)}));
    task.prompt_id = id;

    std::vector<Rollout> rollouts;
    rollouts.reserve(static_cast<std::size_t>(config_.group_size));
    for (int k = 0; k < config_.group_size; ++k) {
      const std::uint64_t rollout_seed = derive_seed(
          config_.seed, {fnv1a64("rollout"), static_cast<std::uint64_t>(step),
                         static_cast<std::uint64_t>(g),
                         static_cast<std::uint64_t>(k)});
      rollouts.push_back(sample_rollout(params_, task, stage.max_output,
                                        config_.temperature, config_.top_p,
                                        rollout_seed));
    }
    drawn.batch.groups.push_back(make_group(std::move(rollouts)));
    drawn.tasks.push_back(std::move(task));
  }
  return drawn;
}

void Trainer::resolve_mask_thresholds() {
  const bool need_token =
      config_.mask_kind == MaskKind::token_level && !config_.tau_token.has_value();
  const bool need_sequence = config_.mask_kind == MaskKind::sequence_level &&
                             !config_.tau_sequence.has_value();
  if (!need_token && !need_sequence) {
    return;
  }

  // One warmup batch under the initial parameters; thresholds default to
  // the 80th percentile of the relevant entropy statistic.
  const std::uint64_t warmup_seed =
      derive_seed(config_.seed, {fnv1a64("warmup-epoch")});
  const auto batches =
      config_.sampler == SamplerKind::balanced
          ? balanced_batches(index_, config_.batch_groups, warmup_seed)
          : shuffled_batches(index_, config_.batch_groups, warmup_seed);
  if (batches.empty()) {
    throw ConfigError("dataset too small: no warmup batch");
  }
  const StageLimits& stage =
      config_.curriculum[static_cast<std::size_t>(stage_index_for(0))];

  std::vector<double> token_entropies;
  std::vector<double> sequence_entropies;
  for (std::size_t g = 0; g < batches.front().size(); ++g) {
    const std::string& id = batches.front()[g];
    EnvTask task = generate_task(
        config_.env, task_of_id_.at(id), stage,
        derive_seed(config_.seed, {fnv1a64("sample"), fnv1a64(id)}));
    task.prompt_id = id;
    for (int k = 0; k < config_.group_size; ++k) {
      const Rollout r = sample_rollout(
          params_, task, stage.max_output, config_.temperature, config_.top_p,
          derive_seed(config_.seed,
                      {fnv1a64("warmup-rollout"), static_cast<std::uint64_t>(g),
                       static_cast<std::uint64_t>(k)}));
      token_entropies.insert(token_entropies.end(), r.entropies.begin(),
                             r.entropies.end());
      sequence_entropies.push_back(sequence_entropy(r));
    }
  }
  if (need_token) {
    config_.tau_token = percentile(std::move(token_entropies), 0.8);
  }
  if (need_sequence) {
    config_.tau_sequence = percentile(std::move(sequence_entropies), 0.8);
  }
}

StepMetrics Trainer::step() {
  DrawnBatch drawn = draw_batch(step_);
  TrainBatch& batch = drawn.batch;

  compute_advantages(batch, config_.advantage);
  const double entropy = batch_entropy(batch);
  aepo_ = aepo_step(aepo_, entropy);
  const BatchMask mask = effective_mask(aepo_, batch, mask_mode_);
  const std::vector<double> grad =
      grpo_gradient(params_, batch, drawn.tasks, mask, config_.temperature);

  double norm_sq = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    params_.theta[i] += config_.learning_rate * grad[i];
    norm_sq += grad[i] * grad[i];
  }

  StepMetrics m;
  m.step = step_;
  m.stage_index = stage_index_for(step_);
  std::map<std::string, std::pair<double, std::size_t>> per_task;
  double reward_mean = 0.0;
  double len_mean = 0.0;
  std::size_t n = 0;
  for (const RolloutGroup& g : batch.groups) {
    for (const Rollout& r : g.rollouts) {
      ++n;
      reward_mean += (r.reward - reward_mean) / static_cast<double>(n);
      len_mean += (static_cast<double>(r.tokens.size()) - len_mean) /
                  static_cast<double>(n);
      auto& [sum, count] = per_task[std::string(to_string(r.task))];
      sum += r.reward;
      ++count;
    }
  }
  m.mean_reward = reward_mean;
  m.mean_response_len = len_mean;
  for (const auto& [name, acc] : per_task) {
    m.per_task_mean_reward[name] = acc.first / static_cast<double>(acc.second);
  }
  m.batch_entropy = entropy;
  m.aepo_mode = std::string(to_string(aepo_.mode));
  m.masked_token_fraction =
      static_cast<double>(mask.zero_count()) /
      static_cast<double>(mask.total_tokens());
  m.grad_norm = std::sqrt(norm_sq);

  ++step_;
  return m;
}

RunResult run_training(const RunConfig& config,
                       const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  Trainer trainer(config);

  const auto metrics_path = out_dir / "metrics.jsonl";
  std::ofstream metrics_out(metrics_path, std::ios::trunc);
  if (!metrics_out) {
    throw ConfigError("unwritable output path: " + metrics_path.string());
  }
  {
    std::ofstream config_out(out_dir / "config.json", std::ios::trunc);
    if (!config_out) {
      throw ConfigError("unwritable output path: " +
                        (out_dir / "config.json").string());
    }
    config_out << run_config_to_json(trainer.config());
  }

  RunResult result;
  while (trainer.current_step() < config.total_steps) {
    StepMetrics m = trainer.step();
    metrics_out << metrics_to_json_line(m) << '\n';
    metrics_out.flush();
    result.metrics.push_back(std::move(m));
  }

  save_params({trainer.params(), trainer.current_step(),
               trainer.aepo_state().mode},
              out_dir / "params.txt");
  result.params = trainer.params();
  return result;
}

RunResult run_training(const RunConfig& config) {
  Trainer trainer(config);
  RunResult result;
  while (trainer.current_step() < config.total_steps) {
    result.metrics.push_back(trainer.step());
  }
  result.params = trainer.params();
  return result;
}

std::map<TaskKind, double> evaluate(const PolicyParams& params,
                                    const RunConfig& config, int tasks_per_kind,
                                    std::uint64_t seed, bool greedy) {
  if (tasks_per_kind < 1) {
    throw std::invalid_argument("tasks_per_kind must be positive");
  }
  const StageLimits& stage = config.curriculum.back();
  std::map<TaskKind, double> out;
  for (std::size_t ki = 0; ki < config.env.tasks.size(); ++ki) {
    const TaskKind kind = config.env.tasks[ki];
    double mean = 0.0;
    for (int i = 0; i < tasks_per_kind; ++i) {
      EnvTask task = generate_task(
          config.env, kind, stage,
          derive_seed(seed, {fnv1a64("eval-task"), ki,
                             static_cast<std::uint64_t>(i)}));
      const Rollout r = sample_rollout(
          params, task, stage.max_output, greedy ? 0.0 : config.temperature,
          config.top_p,
          derive_seed(seed, {fnv1a64("eval-rollout"), ki,
                             static_cast<std::uint64_t>(i)}));
      mean += (r.reward - mean) / static_cast<double>(i + 1);
    }
    out[kind] = mean;
  }
  return out;
}

}  // namespace longrl
