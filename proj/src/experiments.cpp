#include "mixsamp/experiments.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mixsamp {

namespace {

// Stream tags for deriving independent per-trial seeds from the master seed.
constexpr std::uint64_t kPulseStream = 1;
constexpr std::uint64_t kObservableStream = 2;
constexpr std::uint64_t kPhaseStream = 3;

struct CoreJob {
    std::string group;  // label stamped on every record
    ChainParams chain;
    PulseSpec pulse_template;
    std::vector<double> purity_targets;
    std::vector<EstimatorKind> kinds;
    std::vector<int> ks;
    int n_trials = 1;
    std::uint64_t master_seed = 1;
    int threads = 1;
    bool traceless_observables = true;
    bool record_intermediate = false;
    bool record_diag_fraction = false;
    std::optional<ComplexMatrix> fixed_observable;
};

struct TrialOutput {
    std::vector<TrialRecord> records;
    std::vector<std::vector<double>> time_rows;  // trial,purity,estimator,k,time,exact,estimate
    double diag_fraction = 0.0;
};

struct PurityContext {
    double target = 0.0;
    double beta = 0.0;
    RealVector populations;   // descending
    double p_min = 0.0;
    PopulationVector population_vector;
};

struct JobContext {
    HermitianEigensystem h0_eigensystem;
    ComplexMatrix rho_basis;  // shared eigenbasis, most-populated first
    std::vector<PurityContext> purities;

    explicit JobContext(const CoreJob& job) {
        const HermitianObservable h0 = build_hamiltonian(job.chain, 0.0);
        h0_eigensystem = h0.eigensystem();
        for (double target : job.purity_targets) {
            PurityContext ctx{target, 0.0, RealVector(), 0.0, PopulationVector({1.0})};
            ctx.beta = beta_for_purity(h0, target);
            DensityMatrix rho = thermal_state(h0, ctx.beta);
            ctx.populations = rho.population_values();
            ctx.p_min = ctx.populations(ctx.populations.size() - 1);
            ctx.population_vector = rho.populations();
            purities.push_back(std::move(ctx));
        }
        // Thermal populations descend with ascending energy for every beta,
        // and the stable sort keeps the eigh order among ties, so one basis
        // (the energy eigenbasis as-is) serves the whole purity grid.
        rho_basis = h0_eigensystem.eigenvectors;
    }
};

// Estimator values for one purity from the per-column expectation values of
// the shared forward/backward passes.
struct TrialData {
    // V block: Re <E_i(T)|A|E_i(T)> for the full eigenbasis.
    RealVector eigen_values;
    // Random-phase blocks keyed by (purity, kind, k): per-realization
    // expectation values and squared norms of the evolved states.
    struct RpBlock {
        RealVector values;
        RealVector norms;
        std::uint64_t seed = 0;
    };
    std::map<std::tuple<int, int, int>, RpBlock> rp_blocks;
    // Observable block: |<A_n(T)|E_m>|^2 weights and eigenvalues a_n.
    Eigen::MatrixXd obs_overlap_sq;  // k_obs x N
    RealVector obs_eigenvalues;      // k_obs, modulus-descending
    std::vector<double> obs_all_eigenvalues;
};

double checked_real(const Complex& total) {
    if (std::abs(total.imag()) > 1e-10 * std::max(1.0, std::abs(total.real())))
        throw std::runtime_error("expectation value has a non-real component");
    return total.real();
}

double exact_from(const TrialData& data, const PurityContext& ctx) {
    return ctx.populations.dot(data.eigen_values);
}

double eigen_estimate_from(const TrialData& data, const PurityContext& ctx, int k,
                           EnhancementFlags flags, double lambda0) {
    const double shift = flags.trace_shift ? lambda0 : 0.0;
    const double p_min = flags.background_removal ? ctx.p_min : 0.0;
    double total = 0.0;
    for (int i = 0; i < k; ++i)
        total += (ctx.populations(i) - p_min) * (data.eigen_values(i) - shift);
    return total + shift;
}

double rp_estimate_from(const TrialData::RpBlock& block, int n, int k,
                        EnhancementFlags flags, double lambda0) {
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        double value = block.values(i);
        if (flags.trace_shift) value -= lambda0 * block.norms(i);
        total += value;
    }
    const double shift = flags.trace_shift ? lambda0 : 0.0;
    return total * static_cast<double>(n) / k + shift;
}

double obs_estimate_from(const TrialData& data, const PurityContext& ctx, int k) {
    double total = 0.0;
    for (int i = 0; i < k; ++i)
        total += data.obs_eigenvalues(i) * data.obs_overlap_sq.row(i).dot(ctx.populations);
    return total;
}

bool wants_family(const std::vector<EstimatorKind>& kinds, EstimatorFamily family) {
    for (const EstimatorKind& kind : kinds)
        if (kind.family == family) return true;
    return false;
}

TrialOutput run_one_trial(const CoreJob& job, const JobContext& ctx, int trial) {
    const int n = job.chain.dim();
    const auto trial_u = static_cast<std::uint64_t>(trial);

    PulseSpec spec = job.pulse_template;
    spec.seed = Rng::derive_seed(job.master_seed, {kPulseStream, trial_u});
    PulseSeries pulse = sample_pulse(spec);
    PropagationPlan plan = PropagationPlan::for_chain(job.chain, std::move(pulse));

    const std::uint64_t obs_seed =
        Rng::derive_seed(job.master_seed, {kObservableStream, trial_u});
    HermitianObservable observable =
        job.fixed_observable
            ? HermitianObservable(*job.fixed_observable)
            : random_observable({job.chain.n_spins, obs_seed, job.traceless_observables, 0.0});
    const ComplexMatrix& a = observable.matrix();
    const double a_norm = observable.norm();
    const double lambda0 = observable.trace() / n;

    const int n_purities = static_cast<int>(ctx.purities.size());
    const int k_max = *std::max_element(job.ks.begin(), job.ks.end());

    // Assemble one forward batch: the shared eigenbasis followed by every
    // random-phase block. One pass through the step unitaries serves all
    // purities, estimators and sample sizes.
    struct RpKey {
        int purity_index;
        int kind_index;
        int k;
        int offset;
        std::uint64_t seed;
    };
    std::vector<RpKey> rp_keys;
    int n_cols = n;
    for (int p = 0; p < n_purities; ++p)
        for (std::size_t kind_index = 0; kind_index < job.kinds.size(); ++kind_index) {
            if (job.kinds[kind_index].family != EstimatorFamily::RandomPhase) continue;
            for (int k : job.ks) {
                const std::uint64_t seed = Rng::derive_seed(
                    job.master_seed, {kPhaseStream, static_cast<std::uint64_t>(p), trial_u,
                                      static_cast<std::uint64_t>(kind_index),
                                      static_cast<std::uint64_t>(k)});
                rp_keys.push_back({p, static_cast<int>(kind_index), k, n_cols, seed});
                n_cols += k;
            }
        }

    StateBatch batch(n, n_cols);
    batch.leftCols(n) = ctx.rho_basis;
    for (const RpKey& key : rp_keys) {
        Rng rng(key.seed);
        RealVector weights = ctx.purities[static_cast<std::size_t>(key.purity_index)].populations;
        if (job.kinds[static_cast<std::size_t>(key.kind_index)].flags.background_removal)
            weights.array() -= weights(weights.size() - 1);
        batch.middleCols(key.offset, key.k) =
            detail::random_phase_states_raw(ctx.rho_basis, weights, key.k, rng);
    }

    // Intermediate-time recording hooks into the same pass.
    std::vector<int> checkpoints;
    const int n_steps = plan.grid().n_steps;
    if (job.record_intermediate) {
        const int stride = std::max(1, n_steps / 16);
        for (int s = 0; s <= n_steps; s += stride) checkpoints.push_back(s);
        if (checkpoints.back() != n_steps) checkpoints.push_back(n_steps);
    }

    HermitianEigensystem a_eigensystem;
    std::vector<int> obs_picks;
    StateBatch obs_states;
    const bool wants_obs = wants_family(job.kinds, EstimatorFamily::Observable);
    if (wants_obs) {
        a_eigensystem = observable.eigensystem();
        obs_picks = detail::top_k_by_modulus(a_eigensystem.eigenvalues, k_max);
        obs_states.resize(n, k_max);
        for (int i = 0; i < k_max; ++i)
            obs_states.col(i) =
                a_eigensystem.eigenvectors.col(obs_picks[static_cast<std::size_t>(i)]);
    }

    TrialOutput out;
    auto capture = [&](int, const StateBatch& states) -> TrialData {
        TrialData data;
        ComplexVector vals = expectation_values(a, states);
        data.eigen_values.resize(n);
        Complex exact_total(0, 0);
        for (int i = 0; i < n; ++i) data.eigen_values(i) = vals(i).real();
        // Imaginary-part consistency check on the most mixed purity.
        for (int i = 0; i < n; ++i)
            exact_total += ctx.purities.front().populations(i) * vals(i);
        checked_real(exact_total);
        for (const RpKey& key : rp_keys) {
            TrialData::RpBlock block;
            block.values.resize(key.k);
            block.norms.resize(key.k);
            for (int i = 0; i < key.k; ++i) {
                block.values(i) = vals(key.offset + i).real();
                block.norms(i) = states.col(key.offset + i).squaredNorm();
            }
            block.seed = key.seed;
            data.rp_blocks[{key.purity_index, key.kind_index, key.k}] = std::move(block);
        }
        if (wants_obs) {
            data.obs_eigenvalues.resize(k_max);
            for (int i = 0; i < k_max; ++i)
                data.obs_eigenvalues(i) =
                    a_eigensystem.eigenvalues(obs_picks[static_cast<std::size_t>(i)]);
            data.obs_all_eigenvalues.assign(
                a_eigensystem.eigenvalues.data(),
                a_eigensystem.eigenvalues.data() + a_eigensystem.eigenvalues.size());
            // <A_n(t)|rho|A_n(t)> = sum_m p_m |<A_n|E_m(t)>|^2 with E_m(t)
            // the forward-evolved basis, so the backward pass is implicit.
            ComplexMatrix overlaps = obs_states.adjoint() * states.leftCols(n);
            data.obs_overlap_sq = overlaps.cwiseAbs2();
        }
        return data;
    };

    std::vector<std::pair<int, TrialData>> checkpoint_data;
    StepObserver observer;
    if (job.record_intermediate) {
        observer = [&](int steps_done, const StateBatch& states) {
            if (std::find(checkpoints.begin(), checkpoints.end(), steps_done) !=
                checkpoints.end())
                checkpoint_data.emplace_back(steps_done, capture(steps_done, states));
        };
    }

    StateBatch evolved = propagate_forward(plan, std::move(batch), observer);
    TrialData data = job.record_intermediate ? checkpoint_data.back().second
                                             : capture(n_steps, evolved);

    for (int p = 0; p < n_purities; ++p) {
        const PurityContext& purity = ctx.purities[static_cast<std::size_t>(p)];
        const double exact = exact_from(data, purity);
        for (std::size_t kind_index = 0; kind_index < job.kinds.size(); ++kind_index) {
            const EstimatorKind& kind = job.kinds[kind_index];
            for (int k : job.ks) {
                TrialRecord record;
                record.group = job.group;
                record.purity_index = p;
                record.trial_id = trial;
                record.purity = purity.target;
                record.estimator = kind.id();
                record.k = k;
                record.exact = exact;
                switch (kind.family) {
                    case EstimatorFamily::Eigenstate:
                        record.estimate =
                            eigen_estimate_from(data, purity, k, kind.flags, lambda0);
                        record.bound =
                            worst_case_bound(purity.population_vector, k,
                                             kind.flags.background_removal).bound * a_norm;
                        break;
                    case EstimatorFamily::RandomPhase: {
                        const auto& block =
                            data.rp_blocks.at({p, static_cast<int>(kind_index), k});
                        record.estimate = rp_estimate_from(block, n, k, kind.flags, lambda0);
                        record.seed = block.seed;
                        // Reference bound: the matching ensemble-side bound.
                        record.bound =
                            worst_case_bound(purity.population_vector, k,
                                             kind.flags.background_removal).bound * a_norm;
                        break;
                    }
                    case EstimatorFamily::Observable:
                        record.estimate = obs_estimate_from(data, purity, k);
                        record.bound = observable_bound(data.obs_all_eigenvalues, k).bound;
                        break;
                }
                record.abs_err = std::abs(exact - record.estimate);
                out.records.push_back(std::move(record));
            }
        }
    }

    if (job.record_intermediate) {
        for (const auto& [steps_done, snapshot] : checkpoint_data) {
            const double time = steps_done * plan.grid().dt;
            for (int p = 0; p < n_purities; ++p) {
                const PurityContext& purity = ctx.purities[static_cast<std::size_t>(p)];
                const double exact_t = exact_from(snapshot, purity);
                for (std::size_t kind_index = 0; kind_index < job.kinds.size(); ++kind_index) {
                    const EstimatorKind& kind = job.kinds[kind_index];
                    for (int k : job.ks) {
                        double estimate = 0.0;
                        switch (kind.family) {
                            case EstimatorFamily::Eigenstate:
                                estimate = eigen_estimate_from(snapshot, purity, k,
                                                               kind.flags, lambda0);
                                break;
                            case EstimatorFamily::RandomPhase:
                                estimate = rp_estimate_from(
                                    snapshot.rp_blocks.at({p, static_cast<int>(kind_index), k}),
                                    n, k, kind.flags, lambda0);
                                break;
                            case EstimatorFamily::Observable:
                                estimate = obs_estimate_from(snapshot, purity, k);
                                break;
                        }
                        out.time_rows.push_back({static_cast<double>(trial), purity.target,
                                                 static_cast<double>(kind_index),
                                                 static_cast<double>(k), time, exact_t,
                                                 estimate});
                    }
                }
            }
        }
    }

    if (job.record_diag_fraction)
        out.diag_fraction = heisenberg_diagonal_fraction(observable, plan, ctx.h0_eigensystem);
    return out;
}

struct CoreResult {
    std::vector<TrialRecord> records;
    std::vector<AggregateRow> rows;
    std::vector<std::vector<double>> time_rows;
    std::vector<double> diag_fractions;  // per trial
};

CoreResult run_core(const CoreJob& job) {
    JobContext ctx(job);
    std::vector<TrialOutput> outputs(static_cast<std::size_t>(job.n_trials));
    std::vector<char> failed(static_cast<std::size_t>(job.n_trials), 0);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int trial = next.fetch_add(1); trial < job.n_trials; trial = next.fetch_add(1)) {
            try {
                outputs[static_cast<std::size_t>(trial)] = run_one_trial(job, ctx, trial);
            } catch (const std::exception&) {
                // A failed trial is excluded from the aggregates but keeps
                // its slot so reruns stay aligned.
                failed[static_cast<std::size_t>(trial)] = 1;
            }
        }
    };
    const int n_threads = std::clamp(job.threads, 1, job.n_trials);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    CoreResult result;
    for (int trial = 0; trial < job.n_trials; ++trial) {
        auto& output = outputs[static_cast<std::size_t>(trial)];
        if (failed[static_cast<std::size_t>(trial)]) {
            for (std::size_t p = 0; p < job.purity_targets.size(); ++p)
                for (const EstimatorKind& kind : job.kinds)
                    for (int k : job.ks) {
                        TrialRecord record;
                        record.group = job.group;
                        record.purity_index = static_cast<int>(p);
                        record.trial_id = trial;
                        record.purity = job.purity_targets[p];
                        record.estimator = kind.id();
                        record.k = k;
                        record.failed = true;
                        result.records.push_back(std::move(record));
                    }
            result.diag_fractions.push_back(std::nan(""));
            continue;
        }
        for (TrialRecord& record : output.records) result.records.push_back(std::move(record));
        for (auto& row : output.time_rows) result.time_rows.push_back(std::move(row));
        result.diag_fractions.push_back(output.diag_fraction);
    }

    // Deterministic reduce: records are keyed, trials visited in order.
    for (std::size_t p = 0; p < job.purity_targets.size(); ++p) {
        for (const EstimatorKind& kind : job.kinds) {
            const std::string id = kind.id();
            for (int k : job.ks) {
                std::vector<double> errors;
                double bound_sum = 0.0;
                int n_failed = 0;
                for (const TrialRecord& record : result.records) {
                    if (record.purity_index != static_cast<int>(p) || record.k != k ||
                        record.estimator != id)
                        continue;
                    if (record.failed) {
                        ++n_failed;
                        continue;
                    }
                    errors.push_back(record.abs_err);
                    bound_sum += record.bound;
                }
                AggregateRow row;
                row.purity = job.purity_targets[p];
                row.estimator = id;
                row.k = k;
                row.n_failed = n_failed;
                if (!errors.empty()) {
                    double sum = 0.0;
                    for (double e : errors) sum += e;
                    row.mean_err = sum / static_cast<double>(errors.size());
                    row.p10 = nearest_rank_percentile(errors, 10.0);
                    row.p90 = nearest_rank_percentile(errors, 90.0);
                    row.bound = bound_sum / static_cast<double>(errors.size());
                }
                result.rows.push_back(std::move(row));
            }
        }
    }
    return result;
}

CoreJob job_from_config(const SweepConfig& config) {
    CoreJob job;
    job.chain = config.chain;
    job.pulse_template = config.pulse;
    job.purity_targets = config.purity_grid;
    job.kinds = config.estimators;
    for (const KSpec& spec : config.k_values) job.ks.push_back(spec.resolve(config.chain.dim()));
    std::sort(job.ks.begin(), job.ks.end());
    job.ks.erase(std::unique(job.ks.begin(), job.ks.end()), job.ks.end());
    job.n_trials = config.n_observables;
    job.master_seed = config.master_seed;
    job.threads = config.threads;
    job.traceless_observables = config.traceless_observables;
    job.record_intermediate = config.record_intermediate;
    return job;
}

const std::vector<std::string> kTimeHeader = {"trial", "purity",   "estimator_index", "k",
                                              "time",  "exact",    "estimate"};

void append_time_table(SweepResult& result, const std::string& name, CoreResult& core) {
    if (core.time_rows.empty()) return;
    result.aux.push_back({name, kTimeHeader, std::move(core.time_rows)});
}

std::string short_number(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace

SweepResult run_purity_sweep(const SweepConfig& config) {
    config.validate();
    CoreJob job = job_from_config(config);
    CoreResult core = run_core(job);
    SweepResult result;
    result.tables.push_back({"purity_sweep", std::move(core.rows)});
    result.trials = std::move(core.records);
    append_time_table(result, "purity_sweep_times", core);
    return result;
}

SweepResult run_sample_size_sweep(const SweepConfig& config) {
    config.validate();
    CoreJob job = job_from_config(config);
    CoreResult core = run_core(job);
    SweepResult result;
    for (int k : job.ks) {
        Table table{"k_sweep_k" + std::to_string(k), {}};
        for (const AggregateRow& row : core.rows)
            if (row.k == k) table.rows.push_back(row);
        result.tables.push_back(std::move(table));
    }
    result.trials = std::move(core.records);
    append_time_table(result, "k_sweep_times", core);
    return result;
}

SweepResult run_spectrum_comparison(const SweepConfig& config) {
    config.validate();
    if (config.presets.size() < 2)
        throw std::invalid_argument("spectrum comparison needs at least two presets");

    SweepResult result;
    for (std::size_t preset_index = 0; preset_index < config.presets.size(); ++preset_index) {
        const SpectrumPreset& preset = config.presets[preset_index];
        const std::string label = "preset" + std::to_string(preset_index + 1);

        SweepConfig preset_config = config;
        preset_config.chain.coupling_j = preset.coupling_j;
        preset_config.chain.field_hz = preset.field_hz;

        HermitianObservable h0 = build_hamiltonian(preset_config.chain, 0.0);
        HermitianEigensystem es = h0.eigensystem();

        AuxTable spectrum{"spectrum_" + label, {"index", "energy"}, {}};
        for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i)
            spectrum.rows.push_back({static_cast<double>(i), es.eigenvalues(i)});
        result.aux.push_back(std::move(spectrum));

        AuxTable residuum{"residuum_" + label, {"purity", "k", "residuum"}, {}};
        for (double target : config.residuum_purities) {
            DensityMatrix rho = thermal_state(h0, beta_for_purity(h0, target));
            PopulationVector populations = rho.populations();
            for (int k = 0; k <= rho.dim(); ++k)
                residuum.rows.push_back(
                    {target, static_cast<double>(k), population_residuum(populations, k)});
        }
        result.aux.push_back(std::move(residuum));

        CoreJob job = job_from_config(preset_config);
        job.group = label;
        CoreResult core = run_core(job);
        result.tables.push_back({"spectrum_sweep_" + label, std::move(core.rows)});
        append_time_table(result, "spectrum_sweep_" + label + "_times", core);
        for (TrialRecord& record : core.records) result.trials.push_back(std::move(record));
    }
    return result;
}

SweepResult run_polarization_study(const SweepConfig& config) {
    config.validate();
    if (config.emax_grid.empty())
        throw std::invalid_argument("polarization study needs a nonempty emax_grid");

    const int n = config.chain.dim();
    HermitianObservable polarization = total_polarization(config.chain.n_spins);
    // Rescale to ||A||_HS = sqrt(N) for comparability with the randomized
    // observables.
    ComplexMatrix scaled =
        polarization.matrix() * (std::sqrt(static_cast<double>(n)) / polarization.norm());

    SweepResult result;
    AuxTable fractions{"polarization_diag_fraction", {"emax", "trial", "fraction"}, {}};
    for (double emax : config.emax_grid) {
        const std::string label = "emax" + short_number(emax);
        CoreJob job = job_from_config(config);
        job.group = label;
        job.pulse_template.e_max = emax;
        job.fixed_observable = scaled;
        job.record_diag_fraction = true;
        CoreResult core = run_core(job);
        result.tables.push_back({"polarization_" + label, std::move(core.rows)});
        append_time_table(result, "polarization_" + label + "_times", core);
        for (std::size_t trial = 0; trial < core.diag_fractions.size(); ++trial)
            fractions.rows.push_back(
                {emax, static_cast<double>(trial), core.diag_fractions[trial]});
        for (TrialRecord& record : core.records) result.trials.push_back(std::move(record));
    }
    result.aux.push_back(std::move(fractions));
    return result;
}

AuxTable compute_bound_table(const SweepConfig& config) {
    config.validate();
    HermitianObservable h0 = build_hamiltonian(config.chain, 0.0);
    AuxTable table{"bounds", {"purity", "k", "bound_plain", "bound_reduced"}, {}};
    for (double target : config.purity_grid) {
        DensityMatrix rho = thermal_state(h0, beta_for_purity(h0, target));
        PopulationVector populations = rho.populations();
        for (const KSpec& spec : config.k_values) {
            const int k = spec.resolve(config.chain.dim());
            table.rows.push_back({target, static_cast<double>(k),
                                  worst_case_bound(populations, k, false).bound,
                                  worst_case_bound(populations, k, true).bound});
        }
    }
    return table;
}

AuxTable make_pulse_table(const SweepConfig& config) {
    config.pulse.validate();
    PulseSpec spec = config.pulse;
    spec.seed = Rng::derive_seed(config.master_seed, {kPulseStream, 0});
    PulseSeries pulse = sample_pulse(spec);
    AuxTable table{"pulse", {"t", "field"}, {}};
    for (int i = 0; i < pulse.size(); ++i)
        table.rows.push_back({pulse.grid.time(i), pulse.values[static_cast<std::size_t>(i)]});
    return table;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

std::string table_csv(const Table& table) {
    std::ostringstream out;
    out << "purity,estimator,k,mean_err,p10,p90,bound\n";
    for (const AggregateRow& row : table.rows)
        out << format_double(row.purity) << ',' << row.estimator << ',' << row.k << ','
            << format_double(row.mean_err) << ',' << format_double(row.p10) << ','
            << format_double(row.p90) << ',' << format_double(row.bound) << '\n';
    return out.str();
}

std::string aux_csv(const AuxTable& table) {
    std::ostringstream out;
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    return out.str();
}

std::string trials_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream out;
    out << "group,trial,purity,estimator,k,exact,estimate,abs_err,bound,seed,failed\n";
    for (const TrialRecord& r : records)
        out << r.group << ',' << r.trial_id << ',' << format_double(r.purity) << ','
            << r.estimator << ',' << r.k << ',' << format_double(r.exact) << ','
            << format_double(r.estimate) << ',' << format_double(r.abs_err) << ','
            << format_double(r.bound) << ',' << r.seed << ',' << (r.failed ? 1 : 0) << '\n';
    return out.str();
}

std::string failures_csv(const std::vector<TrialRecord>& records) {
    std::map<std::tuple<std::string, double, std::string, int>, int> counts;
    for (const TrialRecord& r : records)
        if (r.failed) ++counts[{r.group, r.purity, r.estimator, r.k}];
    std::ostringstream out;
    out << "group,purity,estimator,k,n_failed\n";
    for (const auto& [key, count] : counts)
        out << std::get<0>(key) << ',' << format_double(std::get<1>(key)) << ','
            << std::get<2>(key) << ',' << std::get<3>(key) << ',' << count << '\n';
    return out.str();
}

std::string plot_script(const Table& table, const SweepConfig& config) {
    std::ostringstream out;
    out << "# gnuplot script for " << table.name << ".csv\n";
    out << "set datafile separator ','\n";
    out << "set logscale y\n";
    out << "set xlabel 'purity'\n";
    out << "set ylabel 'mean absolute error'\n";
    out << "set key outside\n";
    std::vector<int> ks;
    for (const KSpec& spec : config.k_values) ks.push_back(spec.resolve(config.chain.dim()));
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    out << "plot ";
    bool first = true;
    for (const EstimatorKind& kind : config.estimators)
        for (int k : ks) {
            if (!first) out << ", \\\n     ";
            first = false;
            out << "'" << table.name << ".csv' every ::1 using "
                << "((strcol(2) eq '" << kind.id() << "') && ($3 == " << k
                << ") ? $1 : NaN):4 with linespoints title '" << kind.id() << " k=" << k << "'";
        }
    out << "\n";
    return out.str();
}

}  // namespace

void emit_outputs(const SweepResult& result, const SweepConfig& config,
                  const std::string& command, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::path dir(out_dir);
    fs::create_directories(dir);

    for (const Table& table : result.tables) {
        write_file(dir / (table.name + ".csv"), table_csv(table));
        write_file(dir / ("plot_" + table.name + ".gp"), plot_script(table, config));
    }
    for (const AuxTable& table : result.aux)
        write_file(dir / (table.name + ".csv"), aux_csv(table));
    if (!result.trials.empty())
        write_file(dir / "trials.csv", trials_csv(result.trials));
    bool any_failed = false;
    for (const TrialRecord& record : result.trials) any_failed |= record.failed;
    if (any_failed) write_file(dir / "failures.csv", failures_csv(result.trials));
    write_file(dir / "manifest.txt", config_to_text(config, command));
}

}  // namespace mixsamp
