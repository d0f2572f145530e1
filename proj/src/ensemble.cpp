#include "biphoton/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "biphoton/error.hpp"

namespace biphoton {
namespace {

void add_into(std::vector<double>& a, std::vector<double> const& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] += b[i];
}

double mean_stderr(double sum, double sum_sq, double n) {
    if (n < 2.0)
        return std::numeric_limits<double>::quiet_NaN();
    double const mean = sum / n;
    double const var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
}

// Delta-method standard error of mean(Y) / mean(X).
double ratio_stderr(double sy, double sx, double syy, double sxx, double sxy, double n) {
    if (n < 2.0 || !(sx > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    double const r = sy / sx;
    double const resid = std::max(0.0, (syy - 2.0 * r * sxy + r * r * sxx) / (n - 1.0));
    return std::sqrt(resid / n) / (sx / n);
}

} // namespace

void EnsembleSpec::validate() const {
    if (n_realizations < 1)
        throw InvalidArgument("ensemble.n_realizations: must be >= 1");
    if (state_specs.empty())
        throw InvalidArgument("states: at least one input state is required");
    scene_spec.validate();
    for (auto const& s : state_specs)
        s.validate();
    if (speckle) {
        if (speckle->offsets.empty())
            throw InvalidArgument("speckle.offsets: at least one offset is required");
        for (double o : speckle->offsets) {
            double const theta = speckle->reference.theta() + o;
            if (!(theta > std::numbers::pi / 2 && theta < 3 * std::numbers::pi / 2))
                throw InvalidArgument("speckle.offsets: incidence outside (90, 270) deg");
        }
    }
}

StateSums StateSums::zeros(std::size_t n, bool pairwise) {
    StateSums s;
    for (auto* v : {&s.i1, &s.i1_sq, &s.i1_4, &s.i2, &s.i2_sq, &s.i2_i1sq, &s.c, &s.c_sq})
        v->assign(n, 0.0);
    if (pairwise)
        for (auto* v : {&s.pair_i2, &s.pair_i1i1, &s.pair_c})
            v->assign(n * n, 0.0);
    return s;
}

void StateSums::add(StateSums const& o) {
    add_into(i1, o.i1);
    add_into(i1_sq, o.i1_sq);
    add_into(i1_4, o.i1_4);
    add_into(i2, o.i2);
    add_into(i2_sq, o.i2_sq);
    add_into(i2_i1sq, o.i2_i1sq);
    add_into(c, o.c);
    add_into(c_sq, o.c_sq);
    add_into(pair_i2, o.pair_i2);
    add_into(pair_i1i1, o.pair_i1i1);
    add_into(pair_c, o.pair_c);
}

SpeckleSums SpeckleSums::zeros(std::size_t n) {
    SpeckleSums s;
    for (auto* v : {&s.ref_i, &s.off_i, &s.ref_i2, &s.off_i2, &s.cross_i})
        v->assign(n, 0.0);
    s.cross_field.assign(n, Complex{0.0, 0.0});
    return s;
}

void SpeckleSums::add(SpeckleSums const& o) {
    samples += o.samples;
    add_into(ref_i, o.ref_i);
    add_into(off_i, o.off_i);
    add_into(ref_i2, o.ref_i2);
    add_into(off_i2, o.off_i2);
    add_into(cross_i, o.cross_i);
    for (std::size_t i = 0; i < cross_field.size(); ++i)
        cross_field[i] += o.cross_field[i];
}

void RealizationSums::add(RealizationSums const& o) {
    if (count == 0 && states.empty() && !speckle) {
        *this = o;
        return;
    }
    if (states.size() != o.states.size() || speckle.has_value() != o.speckle.has_value())
        throw InvalidArgument("cannot combine statistics of different ensemble layouts");
    count += o.count;
    for (std::size_t s = 0; s < states.size(); ++s)
        states[s].add(o.states[s]);
    if (speckle)
        speckle->add(*o.speckle);
}

void EnsembleAccumulator::insert(std::uint64_t start, Node node) {
    for (;;) {
        if (node.level > 62)
            throw Error("ensemble accumulator: realization index out of range");
        std::uint64_t const size = std::uint64_t{1} << node.level;
        auto next = nodes_.upper_bound(start);
        if (next != nodes_.begin()) {
            auto const& [pstart, pnode] = *std::prev(next);
            if (pstart + (std::uint64_t{1} << pnode.level) > start)
                throw Error("ensemble accumulator: realization " + std::to_string(start) + " absorbed twice");
        }
        if (next != nodes_.end() && next->first < start + size)
            throw Error("ensemble accumulator: realization " + std::to_string(next->first) + " absorbed twice");

        std::uint64_t const sibling = start ^ size;
        auto it = nodes_.find(sibling);
        if (it == nodes_.end() || it->second.level != node.level) {
            nodes_.emplace(start, std::move(node));
            return;
        }
        Node parent{node.level + 1, {}};
        if (sibling < start) {
            parent.sums = std::move(it->second.sums);
            parent.sums.add(node.sums);
        } else {
            parent.sums = std::move(node.sums);
            parent.sums.add(it->second.sums);
        }
        nodes_.erase(it);
        start = std::min(start, sibling);
        node = std::move(parent);
    }
}

void EnsembleAccumulator::absorb(std::uint64_t realization_index, RealizationSums contribution) {
    insert(realization_index, Node{0, std::move(contribution)});
}

void EnsembleAccumulator::merge(EnsembleAccumulator const& other) {
    for (auto const& [start, node] : other.nodes_)
        insert(start, node);
}

std::uint64_t EnsembleAccumulator::count() const {
    std::uint64_t n = 0;
    for (auto const& [start, node] : nodes_)
        n += node.sums.count;
    return n;
}

RealizationSums EnsembleAccumulator::totals() const {
    RealizationSums total;
    for (auto const& [start, node] : nodes_)
        total.add(node.sums);
    return total;
}

bool operator==(EnsembleAccumulator const& a, EnsembleAccumulator const& b) {
    if (a.nodes_.size() != b.nodes_.size())
        return false;
    for (auto ia = a.nodes_.begin(), ib = b.nodes_.begin(); ia != a.nodes_.end(); ++ia, ++ib)
        if (ia->first != ib->first || ia->second.level != ib->second.level || !(ia->second.sums == ib->second.sums))
            return false;
    return true;
}

std::vector<double> averaged_correlation(StateSums const& sums, std::uint64_t count, AveragingOrder order,
                                         double qe_factor) {
    if (count < 1)
        throw InvalidArgument("averaged_correlation: no realizations absorbed");
    auto const n = static_cast<double>(count);
    std::vector<double> out(sums.i1.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(sums.i1[i] > 0.0))
            throw DarkChannel("averaged_correlation: zero mean single-photon current at detection index " +
                              std::to_string(i));
        if (order == AveragingOrder::RatioOfMeans)
            out[i] = qe_factor * (sums.i2[i] / n) / (sums.i1_sq[i] / n);
        else
            out[i] = qe_factor * sums.c[i] / n;
    }
    return out;
}

std::vector<double> normalize_to_peak(std::vector<double> const& curve, double peak) {
    if (curve.empty())
        throw InvalidArgument("normalize_to_peak: empty curve");
    double const mx = *std::max_element(curve.begin(), curve.end());
    if (!(mx > 0.0))
        throw InvalidArgument("normalize_to_peak: curve has no positive value");
    std::vector<double> out(curve.size());
    double const scale = peak / mx;
    for (std::size_t i = 0; i < curve.size(); ++i)
        out[i] = curve[i] * scale;
    return out;
}

AveragedCurves average_curves(StateSums const& s, std::uint64_t count, InputStateSpec const& spec) {
    AveragedCurves out;
    out.n_realizations = count;
    auto const n = static_cast<double>(count);
    std::size_t const g = s.i1.size();
    double const k = spec.qe_factor;
    for (auto* v : {&out.i1_bar, &out.i1_stderr, &out.i2_bar, &out.i2_stderr, &out.c_bar_stderr,
                    &out.c_prime_bar_stderr, &out.i2_normalized_stderr})
        v->resize(g);
    for (std::size_t i = 0; i < g; ++i) {
        out.i1_bar[i] = s.i1[i] / n;
        out.i1_stderr[i] = mean_stderr(s.i1[i], s.i1_sq[i], n);
        out.i2_bar[i] = s.i2[i] / n;
        out.i2_stderr[i] = mean_stderr(s.i2[i], s.i2_sq[i], n);
        out.c_bar_stderr[i] = k * ratio_stderr(s.i2[i], s.i1_sq[i], s.i2_sq[i], s.i1_4[i], s.i2_i1sq[i], n);
        out.c_prime_bar_stderr[i] = k * mean_stderr(s.c[i], s.c_sq[i], n);
    }
    out.c_bar = averaged_correlation(s, count, AveragingOrder::RatioOfMeans, k);
    out.c_prime_bar = averaged_correlation(s, count, AveragingOrder::MeanOfRatios, k);
    out.i2_bar_normalized = normalize_to_peak(out.i2_bar);
    double const scale = out.i2_bar_normalized.empty() || out.i2_bar.empty()
                             ? 0.0
                             : 2.0 / *std::max_element(out.i2_bar.begin(), out.i2_bar.end());
    for (std::size_t i = 0; i < g; ++i)
        out.i2_normalized_stderr[i] = out.i2_stderr[i] * scale;

    if (!s.pair_i2.empty()) {
        std::vector<double> c(g * g), i2(g * g);
        for (std::size_t i = 0; i < g * g; ++i) {
            i2[i] = s.pair_i2[i] / n;
            c[i] = k * s.pair_i2[i] / s.pair_i1i1[i];
        }
        out.c_bar_pairwise = std::move(c);
        out.i2_bar_pairwise = std::move(i2);
    }
    return out;
}

std::vector<Direction> collect_incidences(EnsembleSpec const& spec) {
    std::vector<Direction> dirs;
    auto add = [&](Direction const& d) {
        for (auto const& e : dirs)
            if (std::abs(e.theta() - d.theta()) <= 1e-12 && std::abs(e.phi() - d.phi()) <= 1e-12)
                return;
        dirs.push_back(d);
    };
    for (auto const& s : spec.state_specs)
        for (auto const& d : required_directions(s))
            add(d);
    if (spec.speckle) {
        add(spec.speckle->reference);
        for (double o : spec.speckle->offsets)
            add(Direction(spec.speckle->reference.theta() + o, spec.speckle->reference.phi()));
    }
    return dirs;
}

RealizationSums realization_sums(EnsembleSpec const& spec, ScatteringMatrix const& s) {
    std::size_t const g = s.rows();
    RealizationSums out;
    out.count = 1;
    for (auto const& state : spec.state_specs) {
        auto const cols = StateColumns::locate(s, state);
        StateSums st = StateSums::zeros(g, spec.record_pairwise);
        std::vector<double> i1(g);
        for (std::size_t i = 0; i < g; ++i) {
            double const a = single_photon_current(s.amplitudes, cols, state, i);
            double const b = two_photon_current(s.amplitudes, cols, state, i, i);
            if (!(a > 0.0))
                throw DarkChannel("dark channel: zero single-photon current at theta = " +
                                  std::to_string(rad_to_deg(s.grid.theta(i))) + " deg");
            double const a2 = a * a;
            double const c = b / a2;
            i1[i] = a;
            st.i1[i] = a;
            st.i1_sq[i] = a2;
            st.i1_4[i] = a2 * a2;
            st.i2[i] = b;
            st.i2_sq[i] = b * b;
            st.i2_i1sq[i] = b * a2;
            st.c[i] = c;
            st.c_sq[i] = c * c;
        }
        if (spec.record_pairwise) {
            for (std::size_t i = 0; i < g; ++i)
                for (std::size_t j = i; j < g; ++j) {
                    double const b = i == j ? st.i2[i] : two_photon_current(s.amplitudes, cols, state, i, j);
                    double const den = i1[i] * i1[j];
                    for (std::size_t idx : {i * g + j, j * g + i}) {
                        st.pair_i2[idx] = b;
                        st.pair_i1i1[idx] = den;
                        st.pair_c[idx] = b / den;
                    }
                }
        }
        out.states.push_back(std::move(st));
    }
    if (spec.speckle) {
        auto const& probe = *spec.speckle;
        auto const ref = static_cast<Eigen::Index>(s.require_column(probe.reference));
        SpeckleSums sp = SpeckleSums::zeros(probe.offsets.size());
        sp.samples = g;
        for (std::size_t o = 0; o < probe.offsets.size(); ++o) {
            auto const col = static_cast<Eigen::Index>(
                s.require_column(Direction(probe.reference.theta() + probe.offsets[o], probe.reference.phi())));
            for (std::size_t i = 0; i < g; ++i) {
                auto const r = static_cast<Eigen::Index>(i);
                Complex const a0 = s.amplitudes(r, ref);
                Complex const ao = s.amplitudes(r, col);
                double const n0 = std::norm(a0);
                double const no = std::norm(ao);
                sp.ref_i[o] += n0;
                sp.off_i[o] += no;
                sp.ref_i2[o] += n0 * n0;
                sp.off_i2[o] += no * no;
                sp.cross_i[o] += n0 * no;
                sp.cross_field[o] += a0 * std::conj(ao);
            }
        }
        out.speckle = std::move(sp);
    }
    return out;
}

RealizationSums realization_sums(EnsembleSpec const& spec, std::uint64_t realization_index) {
    Scene const scene = sample_scene(spec.scene_spec, realization_index, spec.master_seed);
    auto const dirs = collect_incidences(spec);
    auto const s = assemble_smatrix(scene, dirs, spec.grid, PointScatterer::for_spec(spec.scene_spec), spec.solver);
    return realization_sums(spec, s);
}

EnsembleResult finalize(EnsembleSpec const& spec, EnsembleAccumulator accumulator) {
    EnsembleResult result;
    result.totals = accumulator.totals();
    result.accumulator = std::move(accumulator);
    for (std::size_t s = 0; s < spec.state_specs.size(); ++s)
        result.curves.push_back(
            average_curves(result.totals.states[s], result.totals.count, spec.state_specs[s]));
    return result;
}

EnsembleResult run_ensemble(EnsembleSpec const& spec, unsigned workers) {
    if (workers < 1)
        throw InvalidArgument("run_ensemble: workers must be >= 1");
    spec.validate();
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, spec.n_realizations));

    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    std::uint64_t failed_index = std::numeric_limits<std::uint64_t>::max();
    std::string failure_message;
    std::vector<EnsembleAccumulator> partial(workers);

    auto work = [&](unsigned w) {
        while (!failed.load()) {
            std::uint64_t const offset = next.fetch_add(1);
            if (offset >= spec.n_realizations)
                return;
            std::uint64_t const index = spec.first_realization + offset;
            try {
                partial[w].absorb(index, realization_sums(spec, index));
            } catch (std::exception const& e) {
                std::lock_guard lock(failure_mutex);
                if (index < failed_index) {
                    failed_index = index;
                    failure_message = e.what();
                }
                failed.store(true);
                return;
            }
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < workers; ++w)
            threads.emplace_back(work, w);
        for (auto& t : threads)
            t.join();
    }
    if (failed.load())
        throw Error("realization " + std::to_string(failed_index) + " failed: " + failure_message);

    EnsembleAccumulator total;
    for (auto const& p : partial)
        total.merge(p);
    return finalize(spec, std::move(total));
}

} // namespace biphoton
