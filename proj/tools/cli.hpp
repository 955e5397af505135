#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "smp/smp.hpp"

namespace smp::cli {

enum ExitCode : int {
    kOk = 0,
    kComparisonFailed = 1,
    kUsage = 2, // also I/O errors
    kSyntax = 3,
    kValidation = 4,
    kNumeric = 5,
};

/// Time grid from `linspace:start:stop:count`, a comma-separated list, or a
/// single value.
inline std::vector<double> parse_times(const std::string& spec) {
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (...) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw DomainError("bad number '" + s + "' in time spec '" + spec + "'");
        return v;
    };
    std::vector<double> out;
    if (spec.rfind("linspace:", 0) == 0) {
        std::vector<std::string> parts;
        std::stringstream ss(spec.substr(9));
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw DomainError("time spec must be linspace:start:stop:count");
        const double a = number(parts[0]);
        const double b = number(parts[1]);
        const double c = number(parts[2]);
        if (c < 1 || c != std::floor(c)) throw DomainError("linspace count must be a positive integer");
        const auto count = static_cast<std::size_t>(c);
        for (std::size_t k = 0; k < count; ++k)
            out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    } else {
        std::stringstream ss(spec);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
    }
    if (out.empty()) throw DomainError("empty time spec");
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!(out[k] > 0.0)) throw DomainError("time points must be positive");
        if (k > 0 && out[k] < out[k - 1]) throw DomainError("time points must be ascending");
    }
    return out;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// CSV table: header row, then `t` followed by one value per column.
inline void write_table(std::ostream& os, const std::vector<std::string>& columns, const std::vector<double>& times,
                        const std::vector<std::vector<double>>& rows) {
    os << "t";
    for (const auto& c : columns) os << ',' << c;
    os << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        os << format_number(times[r]);
        for (double v : rows[r]) os << ',' << format_number(v);
        os << '\n';
    }
}

namespace detail {

struct Common {
    std::string model_path;
    double euler_A = EulerConfig{}.A;
    int euler_N = EulerConfig{}.n_trunc;
    int euler_M = EulerConfig{}.m_euler;
    std::string out_path;

    EulerConfig euler() const { return {euler_A, euler_N, euler_M}; }
};

inline void add_euler_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--euler-A", c.euler_A, "Euler inversion parameter A")->capture_default_str();
    cmd->add_option("--euler-N", c.euler_N, "Euler truncation term count")->capture_default_str();
    cmd->add_option("--euler-M", c.euler_M, "Euler summation term count")->capture_default_str();
}

class UsageError : public Error {
public:
    using Error::Error;
};

inline std::size_t state_index(const SmpModel& m, const std::string& label) {
    if (auto i = m.index_of(label)) return *i;
    throw UsageError("unknown state '" + label + "'");
}

/// Writes to --out when given, else to `fallback`.
template <typename Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& write) {
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw ModelIoError("cannot write " + path);
    write(f);
}

} // namespace detail

/// Entry point of the `smp` tool; returns the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Semi-Markov process solver", "smp"};
    app.require_subcommand(1);
    detail::Common common;

    auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a model file");
    validate_cmd->add_option("model", common.model_path, "Model file (JSON)")->required();

    std::string quantity_name, start, times_spec, targets;
    unsigned k = 0;
    auto* solve_cmd = app.add_subcommand("solve", "Compute a quantity on a time grid");
    solve_cmd->add_option("model", common.model_path, "Model file (JSON)")->required();
    solve_cmd->add_option("--quantity", quantity_name, "P, occupancy, G, g, hazard, v, V or M")->required();
    solve_cmd->add_option("--k", k, "Visit count for v and V")->capture_default_str();
    solve_cmd->add_option("--start", start, "Start state label")->required();
    solve_cmd->add_option("--times", times_spec, "linspace:start:stop:count, list, or single time")->required();
    solve_cmd->add_option("--targets", targets, "Comma-separated hazard targets (default: all reachable)");
    solve_cmd->add_option("--out", common.out_path, "CSV output file (default stdout)");
    detail::add_euler_flags(solve_cmd, common);

    auto* asym_cmd = app.add_subcommand("asymptotic", "Limiting state probabilities");
    asym_cmd->add_option("model", common.model_path, "Model file (JSON)")->required();
    asym_cmd->add_option("--out", common.out_path, "CSV output file (default stdout)");

    double horizon = 0.0;
    std::size_t n_traj = 100000;
    std::uint64_t seed = 1;
    unsigned k_max = 2;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimates with standard errors");
    sim_cmd->add_option("model", common.model_path, "Model file (JSON)")->required();
    sim_cmd->add_option("--start", start, "Start state label")->required();
    sim_cmd->add_option("--horizon", horizon, "Simulation horizon")->required();
    sim_cmd->add_option("--n", n_traj, "Number of trajectories")->capture_default_str();
    sim_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    sim_cmd->add_option("--times", times_spec, "Estimation times (default: the horizon)");
    sim_cmd->add_option("--k-max", k_max, "Largest k for v estimates")->capture_default_str();
    sim_cmd->add_option("--out", common.out_path, "CSV output file (default stdout)");

    double threshold = 3.0;
    auto* cmp_cmd = app.add_subcommand("compare", "Analytic solution versus simulation");
    cmp_cmd->add_option("model", common.model_path, "Model file (JSON)")->required();
    cmp_cmd->add_option("--start", start, "Start state label")->required();
    cmp_cmd->add_option("--times", times_spec, "Comparison times")->required();
    cmp_cmd->add_option("--n", n_traj, "Number of trajectories")->capture_default_str();
    cmp_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    cmp_cmd->add_option("--k-max", k_max, "Largest k for v")->capture_default_str();
    cmp_cmd->add_option("--threshold", threshold, "Allowed deviation in standard errors")->capture_default_str();
    cmp_cmd->add_option("--out", common.out_path, "CSV of every comparison (default: none)");
    detail::add_euler_flags(cmp_cmd, common);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        const SmpModel model = parse_model(common.model_path);
        SolveOptions options;
        options.euler = common.euler();

        if (validate_cmd->parsed()) {
            const auto classes = classify_states(model);
            out << common.model_path << ": valid, " << model.size() << " states\n";
            for (std::size_t i = 0; i < model.size(); ++i)
                out << "  " << model.label(i) << ": " << to_string(classes[i]) << '\n';
            return kOk;
        }

        if (solve_cmd->parsed()) {
            const auto quantity = parse_quantity(quantity_name);
            if (!quantity) throw detail::UsageError("unknown quantity '" + quantity_name + "'");
            const std::size_t i = detail::state_index(model, start);
            const auto times = parse_times(times_spec);
            std::vector<std::string> columns;
            std::vector<std::vector<double>> rows(times.size());

            if (*quantity == Quantity::Hazard) {
                std::vector<std::size_t> target_idx;
                if (!targets.empty()) {
                    std::stringstream ss(targets);
                    for (std::string t; std::getline(ss, t, ',');) target_idx.push_back(detail::state_index(model, t));
                } else {
                    const auto reach = reach_probability(model, options);
                    for (std::size_t j = 0; j < model.size(); ++j)
                        if (reach.value(i, j) >= 1e-6) target_idx.push_back(j);
                }
                const auto hazards = conditional_hazards(model, i, target_idx, times, options);
                for (std::size_t h = 0; h < hazards.size(); ++h) {
                    for (const auto& w : hazards[h].warnings) err << "warning: " << w << '\n';
                    columns.push_back(model.label(target_idx[h]));
                    for (std::size_t t = 0; t < times.size(); ++t) rows[t].push_back(hazards[h](t, 0, 0));
                }
            } else {
                const auto result = solve_one(model, times, {*quantity, k}, options);
                for (const auto& w : result.warnings) err << "warning: " << w << '\n';
                columns = model.labels();
                for (std::size_t t = 0; t < times.size(); ++t) {
                    const auto r = result.values[t].row(i);
                    rows[t].assign(r.begin(), r.end());
                }
            }
            detail::emit(common.out_path, out, [&](std::ostream& os) { write_table(os, columns, times, rows); });
            return kOk;
        }

        if (asym_cmd->parsed()) {
            const auto result = asymptotic_probabilities(model, options);
            for (const auto& w : result.warnings) err << "warning: " << w << '\n';
            detail::emit(common.out_path, out, [&](std::ostream& os) {
                os << "from";
                for (const auto& l : model.labels()) os << ',' << l;
                os << '\n';
                for (std::size_t i = 0; i < model.size(); ++i) {
                    os << model.label(i);
                    for (std::size_t j = 0; j < model.size(); ++j) os << ',' << format_number(result.pi(i, j));
                    os << '\n';
                }
            });
            return kOk;
        }

        if (sim_cmd->parsed()) {
            const std::size_t i = detail::state_index(model, start);
            if (!(horizon > 0.0)) throw detail::UsageError("--horizon must be positive");
            const auto times = times_spec.empty() ? std::vector<double>{horizon} : parse_times(times_spec);
            if (times.back() > horizon) throw detail::UsageError("estimation times exceed the horizon");
            if (n_traj < 1) throw detail::UsageError("--n must be at least 1");
            const auto est = estimate_all(model, i, times, n_traj, seed, k_max);
            detail::emit(common.out_path, out, [&](std::ostream& os) {
                os << "t,quantity,k,state,estimate,std_error\n";
                auto rows = [&](const char* name, unsigned kk, const std::vector<std::vector<Estimate>>& e) {
                    for (std::size_t t = 0; t < times.size(); ++t)
                        for (std::size_t j = 0; j < model.size(); ++j)
                            os << format_number(times[t]) << ',' << name << ',' << kk << ',' << model.label(j) << ','
                               << format_number(e[t][j].value) << ',' << format_number(e[t][j].std_error) << '\n';
                };
                rows("P", 0, est.P);
                rows("G", 0, est.G);
                rows("M", 0, est.M);
                for (unsigned kk = 0; kk <= k_max; ++kk) rows("v", kk, est.v[kk]);
            });
            return kOk;
        }

        if (cmp_cmd->parsed()) {
            const std::size_t i = detail::state_index(model, start);
            const auto times = parse_times(times_spec);
            if (n_traj < 1) throw detail::UsageError("--n must be at least 1");
            const auto report = compare(model, i, times, n_traj, seed, k_max, options);
            const auto& worst = report.worst();
            out << "compared " << report.rows.size() << " values from " << model.label(i) << " with " << n_traj
                << " trajectories\n"
                << "max deviation: " << format_number(report.max_deviation) << " standard errors ("
                << worst.quantity << (worst.quantity == "v" ? "(" + std::to_string(worst.k) + ")" : "") << " t="
                << format_number(worst.t) << " " << model.label(worst.target) << ": analytic "
                << format_number(worst.analytic) << ", simulated " << format_number(worst.simulated) << ")\n";
            if (!common.out_path.empty()) {
                detail::emit(common.out_path, out, [&](std::ostream& os) {
                    os << "quantity,k,t,state,analytic,simulated,std_error,deviation\n";
                    for (const auto& c : report.rows)
                        os << c.quantity << ',' << c.k << ',' << format_number(c.t) << ',' << model.label(c.target)
                           << ',' << format_number(c.analytic) << ',' << format_number(c.simulated) << ','
                           << format_number(c.std_error) << ',' << format_number(c.deviation) << '\n';
                });
            }
            return report.max_deviation <= threshold ? kOk : kComparisonFailed;
        }
    } catch (const ModelIoError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ModelSyntaxError& e) {
        err << "syntax error: " << e.what() << '\n';
        return kSyntax;
    } catch (const ValidationError& e) {
        err << e.what() << '\n';
        return kValidation;
    } catch (const detail::UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericFailure& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kUsage;
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args);
}

} // namespace smp::cli
