#pragma once

// Pooled label sequence and the Vincze statistic (R, D) with its transform T,
// one-sided (max of F_n - G_m) and two-sided (max of |F_n - G_m|).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtest/errors.hpp"
#include "vtest/exact_arith.hpp"

namespace vtest {

enum class Label : char { X = 'X', Y = 'Y' };
enum class Sided { one_sided, two_sided };
enum class TiePolicy { error, x_first, y_first };

inline const char* to_string(Sided s) { return s == Sided::one_sided ? "one-sided" : "two-sided"; }

struct Sample {
    std::vector<double> values;
    Label label = Label::X;

    Sample() = default;
    Sample(std::vector<double> v, Label l) : values(std::move(v)), label(l) { validate(); }

    void validate() const {
        if (values.empty()) throw DomainError("sample is empty");
        for (double v : values) {
            if (!std::isfinite(v)) throw DomainError("sample contains a non-finite value");
        }
    }
    std::size_t size() const { return values.size(); }
};

/// A value present in both samples.
struct TieRecord {
    double value;
    long x_count;
    long y_count;
};

class LabelSequence {
public:
    LabelSequence() = default;

    explicit LabelSequence(std::vector<Label> labels, std::vector<TieRecord> ties = {})
        : labels_(std::move(labels)), ties_(std::move(ties)) {
        n_ = std::count(labels_.begin(), labels_.end(), Label::X);
        m_ = static_cast<long>(labels_.size()) - n_;
        if (n_ < 1 || m_ < 1) throw DomainError("label sequence needs at least one X and one Y");
    }

    /// Parses a string over {X, Y}, e.g. "XXYY".
    static LabelSequence parse(std::string_view s) {
        std::vector<Label> labels;
        labels.reserve(s.size());
        for (char c : s) {
            if (c == 'X' || c == 'x') labels.push_back(Label::X);
            else if (c == 'Y' || c == 'y') labels.push_back(Label::Y);
            else throw DomainError(std::string("invalid label '") + c + "'");
        }
        return LabelSequence(std::move(labels));
    }

    long n() const { return n_; }
    long m() const { return m_; }
    long total() const { return n_ + m_; }
    const std::vector<Label>& labels() const { return labels_; }
    const std::vector<TieRecord>& ties() const { return ties_; }

    std::string str() const {
        std::string s;
        s.reserve(labels_.size());
        for (Label l : labels_) s.push_back(static_cast<char>(l));
        return s;
    }

private:
    std::vector<Label> labels_;
    std::vector<TieRecord> ties_;
    long n_ = 0;
    long m_ = 0;
};

/// Sorts the pooled sample and returns the source labels in order.
/// Within-sample ties keep input order; cross-sample ties follow `policy`.
inline LabelSequence pool(const Sample& x, const Sample& y, TiePolicy policy = TiePolicy::error) {
    x.validate();
    y.validate();
    struct Entry {
        double value;
        Label label;
        std::size_t index;
    };
    std::vector<Entry> all;
    all.reserve(x.size() + y.size());
    for (std::size_t i = 0; i < x.size(); ++i) all.push_back({x.values[i], Label::X, i});
    for (std::size_t i = 0; i < y.size(); ++i) all.push_back({y.values[i], Label::Y, x.size() + i});

    const Label first = policy == TiePolicy::y_first ? Label::Y : Label::X;
    std::sort(all.begin(), all.end(), [first](const Entry& a, const Entry& b) {
        if (a.value != b.value) return a.value < b.value;
        if (a.label != b.label) return a.label == first;
        return a.index < b.index;
    });

    std::vector<TieRecord> ties;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        long xs = 0;
        long ys = 0;
        while (j < all.size() && all[j].value == all[i].value) {
            (all[j].label == Label::X ? xs : ys) += 1;
            ++j;
        }
        if (xs > 0 && ys > 0) ties.push_back({all[i].value, xs, ys});
        i = j;
    }
    if (policy == TiePolicy::error && !ties.empty()) {
        std::vector<double> vals;
        for (const auto& t : ties) vals.push_back(t.value);
        throw TieError(std::move(vals));
    }

    std::vector<Label> labels;
    labels.reserve(all.size());
    for (const auto& e : all) labels.push_back(e.label);
    return LabelSequence(std::move(labels), std::move(ties));
}

/// Observed Vincze statistic. The difference path is kept in integer units
/// of 1/(nm): F_n(Z_(i)) - G_m(Z_(i)) = c_i / (nm).
struct VinczeResult {
    Sided sided = Sided::one_sided;
    long n = 0;
    long m = 0;
    long r = 0;          // smallest argmax index, 1-based
    long path_max = 0;   // max_i c_i (or max_i |c_i|)
    Rational d;          // D = path_max / (nm)
    std::optional<long> k;  // D = k/m when path_max is a multiple of n
    Rational t_sq;       // T^2 = D^2 / (r (n+m-r)); 0 when r = n+m
    double t_float = 0.0;
    double scaled_t_float = 0.0;

    long total() const { return n + m; }
};

namespace detail {

inline VinczeResult vincze_walk(const LabelSequence& seq, Sided sided) {
    const long n = seq.n();
    const long m = seq.m();
    const long total = n + m;
    std::int64_t c = 0;
    std::int64_t best = 0;
    long best_index = 0;
    long i = 0;
    for (Label l : seq.labels()) {
        ++i;
        c += l == Label::X ? m : -n;
        const std::int64_t v = sided == Sided::one_sided ? c : (c < 0 ? -c : c);
        if (best_index == 0 || v > best) {
            best = v;
            best_index = i;
        }
    }

    VinczeResult res;
    res.sided = sided;
    res.n = n;
    res.m = m;
    res.r = best_index;
    res.path_max = static_cast<long>(best);
    res.d = Rational(BigInt(static_cast<long>(best)), BigInt(n) * m);
    if (best % n == 0) res.k = static_cast<long>(best / n);
    if (res.r < total) {
        res.t_sq = res.d * res.d / Rational(BigInt(res.r) * (total - res.r));
    }
    res.t_float = std::sqrt(res.t_sq.to_double());
    // nm(n+m) T^2 = (n+m) c^2 / (nm r (n+m-r))
    const Rational scaled_sq = res.t_sq * Rational(BigInt(n) * m * total);
    res.scaled_t_float = std::sqrt(scaled_sq.to_double());
    return res;
}

}  // namespace detail

inline VinczeResult vincze_one_sided(const LabelSequence& seq) {
    return detail::vincze_walk(seq, Sided::one_sided);
}

inline VinczeResult vincze_two_sided(const LabelSequence& seq) {
    return detail::vincze_walk(seq, Sided::two_sided);
}

inline VinczeResult vincze(const LabelSequence& seq, Sided sided) {
    return detail::vincze_walk(seq, sided);
}

/// sqrt(nm(n+m)) * T as an exact squared value.
inline Rational scaled_statistic_sq(const VinczeResult& res) {
    return res.t_sq * Rational(BigInt(res.n) * res.m * res.total());
}

inline double scale_statistic(const VinczeResult& res) { return res.scaled_t_float; }

/// sqrt(nm(n+m)) * t for a given exact T^2.
inline double scale_statistic(const Rational& t_sq, long n, long m) {
    return std::sqrt((t_sq * Rational(BigInt(n) * m * (n + m))).to_double());
}

}  // namespace vtest
