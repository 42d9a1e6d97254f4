#include "noonsim/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <unsupported/Eigen/KroneckerProduct>

namespace noonsim {

namespace {

constexpr cplx I1{0.0, 1.0};

}  // namespace

using Entry = TimeDepOp::Entry;

TimeDepOp::TimeDepOp(int dim, const std::vector<Term>& terms) : dim_(dim) {
    std::vector<Entry> entries;
    for (const Term& term : terms) {
        if (term.op.rows() != dim || term.op.cols() != dim) throw DimensionError("TimeDepOp: term has wrong shape");
        int ci = 0;
        if (term.coef) {
            fns_.push_back(term.coef);
            ci = static_cast<int>(fns_.size());
        }
        for (int r = 0; r < term.op.outerSize(); ++r)
            for (SpMat::InnerIterator it(term.op, r); it; ++it)
                entries.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), ci, it.value()});
    }
    assemble(entries);
}

void TimeDepOp::assemble(std::vector<Entry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::tie(a.row, a.col, a.cidx) < std::tie(b.row, b.col, b.cidx);
    });
    row_ptr_.assign(dim_ + 1, 0);
    col_.clear();
    val_.clear();
    cidx_.clear();
    for (std::size_t i = 0; i < entries.size();) {
        Entry e = entries[i++];
        while (i < entries.size() && entries[i].row == e.row && entries[i].col == e.col && entries[i].cidx == e.cidx)
            e.val += entries[i++].val;
        if (e.val == cplx(0.0)) continue;
        col_.push_back(e.col);
        val_.push_back(e.val);
        cidx_.push_back(e.cidx);
        ++row_ptr_[e.row + 1];
    }
    for (int r = 0; r < dim_; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

void TimeDepOp::coefficients(double t, std::vector<cplx>& c) const {
    c.resize(fns_.size() + 1);
    c[0] = 1.0;
    for (std::size_t i = 0; i < fns_.size(); ++i) c[i + 1] = fns_[i](t);
}

void TimeDepOp::apply_with(const std::vector<cplx>& c, const cplx* x, cplx* y) const {
    const int* cp = cidx_.data();
    const int* cl = col_.data();
    const cplx* v = val_.data();
    const cplx* cc = c.data();
    for (int r = 0; r < dim_; ++r) {
        cplx acc = 0.0;
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += v[k] * cc[cp[k]] * x[cl[k]];
        y[r] = acc;
    }
}

void TimeDepOp::apply(double t, const Vec& x, Vec& y, cplx factor) const {
    thread_local std::vector<cplx> c;
    coefficients(t, c);
    for (cplx& v : c) v *= factor;
    y.resize(dim_);
    apply_with(c, x.data(), y.data());
}

void TimeDepOp::apply(double t, const Mat& x, Mat& y, cplx factor) const {
    thread_local std::vector<cplx> c;
    coefficients(t, c);
    for (cplx& v : c) v *= factor;
    y.resize(dim_, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) apply_with(c, x.col(j).data(), y.col(j).data());
}

TimeDepOp TimeDepOp::with_static(const SpMat& m) const {
    if (m.rows() != dim_ || m.cols() != dim_) throw DimensionError("with_static: shape mismatch");
    std::vector<Entry> entries;
    for (int r = 0; r < dim_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) entries.push_back({r, col_[k], cidx_[k], val_[k]});
    for (int r = 0; r < m.outerSize(); ++r)
        for (SpMat::InnerIterator it(m, r); it; ++it)
            entries.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), 0, it.value()});
    TimeDepOp out;
    out.dim_ = dim_;
    out.fns_ = fns_;
    out.assemble(entries);
    return out;
}

SpMat TimeDepOp::at(double t) const {
    std::vector<cplx> c;
    coefficients(t, c);
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(val_.size());
    for (int r = 0; r < dim_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) trip.emplace_back(r, col_[k], val_[k] * c[cidx_[k]]);
    SpMat m(dim_, dim_);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

Ops::Ops(const HilbertSpec& s) : spec(s) {
    a1 = embed(annihilation(s.d), Slot::cavity1, s);
    a2 = embed(annihilation(s.d), Slot::cavity2, s);
    n1 = embed(number_op(s.d), Slot::cavity1, s);
    n2 = embed(number_op(s.d), Slot::cavity2, s);
}

CoefFn resonant_coef(const Envelope& e, const ErrorModel& err) {
    const double g = 1.0 + err.delta;
    return [e, g](double t) { return g * e(t); };
}

CoefFn off_resonant_coef(const Envelope& e, const ErrorModel& err) {
    const double off = err.delta_omega;
    return [e, off](double t) { return e(t) + (e.active(t) ? cplx(off) : cplx(0.0)); };
}

namespace {

void add_resonant(std::vector<Term>& terms, const Ops& o, const DriveSet& dr, const ErrorModel& err) {
    for (auto [level, env] : {std::pair{3, &dr.res03}, std::pair{4, &dr.res04}}) {
        if (env->kind == Envelope::Kind::zero) continue;
        CoefFn c = resonant_coef(*env, err);
        terms.push_back({o.q(0, level), c});
        terms.push_back({o.q(level, 0), [c](double t) { return std::conj(c(t)); }});
    }
}

SpMat cavity_photons(const Ops& o, double dp) { return SpMat(dp * (o.n1 + o.n2)); }

}  // namespace

TimeDepOp build_full(const HilbertSpec& spec, const SystemParams& sys, const DriveSet& dr, const ErrorModel& err) {
    const Ops o(spec);
    std::vector<Term> terms;
    add_resonant(terms, o, dr, err);
    const double lam = sys.lambda + err.delta_lambda;
    const double D = sys.Delta;
    // (upper level, lower level, cavity operator, drive)
    const std::tuple<int, int, const SpMat*, const Envelope*> arms[] = {{4, 1, &o.a1, &dr.om1}, {3, 2, &o.a2, &dr.om2}};
    for (const auto& [hi, lo, a, env] : arms) {
        const SpMat up = o.q(hi, lo), down = o.q(lo, hi);
        if (env->kind != Envelope::Kind::zero) {
            CoefFn om = off_resonant_coef(*env, err);
            terms.push_back({up, [om, D](double t) { return om(t) * std::exp(I1 * (D * t)); }});
            terms.push_back({down, [om, D](double t) { return std::conj(om(t)) * std::exp(-I1 * (D * t)); }});
        }
        terms.push_back({SpMat(lam * SpMat(a->adjoint()) * down), [D](double t) { return std::exp(-I1 * (D * t)); }});
        terms.push_back({SpMat(lam * up * *a), [D](double t) { return std::exp(I1 * (D * t)); }});
    }
    if (sys.delta_p != 0.0) terms.push_back({cavity_photons(o, sys.delta_p), {}});
    if (err.crosstalk_ratio != 0.0) {
        const double l12 = err.crosstalk_ratio * sys.lambda;
        const double Dp = sys.crosstalk_detuning();
        terms.push_back({SpMat(l12 * SpMat(o.a1.adjoint()) * o.a2), [Dp](double t) { return std::exp(I1 * (Dp * t)); }});
        terms.push_back({SpMat(l12 * SpMat(o.a2.adjoint()) * o.a1), [Dp](double t) { return std::exp(-I1 * (Dp * t)); }});
    }
    return TimeDepOp(spec.dim(), terms);
}

TimeDepOp build_effective(const HilbertSpec& spec, const SystemParams& sys, const DriveSet& dr, const ErrorModel& err) {
    if (sys.Delta == 0.0) throw ParameterError("dispersive model needs Delta != 0");
    const Ops o(spec);
    std::vector<Term> terms;
    add_resonant(terms, o, dr, err);
    const double lam = sys.lambda + err.delta_lambda;
    const double D = sys.Delta;
    const std::tuple<int, const SpMat*, const Envelope*> arms[] = {{4, &o.a1, &dr.om1}, {3, &o.a2, &dr.om2}};
    SpMat stat = cavity_photons(o, sys.delta_p);
    for (const auto& [e, a, env] : arms) {
        const SpMat proj = o.q(e, e);
        const SpMat n = SpMat(SpMat(a->adjoint()) * *a);
        stat += (lam * lam / D) * (SpMat(n * proj) + proj);
        if (env->kind == Envelope::Kind::zero) continue;
        CoefFn om = off_resonant_coef(*env, err);
        terms.push_back({SpMat((lam / D) * SpMat(a->adjoint()) * proj), om});
        terms.push_back({SpMat((lam / D) * *a * proj), [om](double t) { return std::conj(om(t)); }});
        terms.push_back({SpMat(proj / D), [om](double t) { return cplx(std::norm(om(t))); }});
    }
    if (err.crosstalk_ratio != 0.0)
        stat += crosstalk_dispersive(spec, err.crosstalk_ratio * sys.lambda, sys.crosstalk_detuning());
    terms.push_back({stat, {}});
    return TimeDepOp(spec.dim(), terms);
}

TimeDepOp build_step1_eff(const HilbertSpec& spec, CoefFn omega_s1) {
    const int dim = spec.dim();
    SpMat up(dim, dim);  // |0,0,0><Phi+|
    const double r = 1.0 / std::sqrt(2.0);
    up.insert(spec.index(0, 0, 0), spec.index(3, 0, 0)) = r;
    up.insert(spec.index(0, 0, 0), spec.index(4, 0, 0)) = r;
    up.makeCompressed();
    std::vector<Term> terms{{up, omega_s1}, {SpMat(up.adjoint()), [omega_s1](double t) { return std::conj(omega_s1(t)); }}};
    return TimeDepOp(dim, terms);
}

TimeDepOp build_step2_eff(const HilbertSpec& spec, const ProtocolParams& p) {
    if (!(p.omega_s2 > 0)) throw ParameterError("step-2 frequency omega_s2 must be positive");
    const Ops o(spec);
    const double w = p.omega_s2, t0 = p.tau1;
    const double g = p.alpha0 / p.T2;
    const double shift = (p.sys.lambda * p.sys.lambda + p.omega_s2_amp * p.omega_s2_amp) / p.sys.Delta;
    SpMat stat(spec.dim(), spec.dim());
    std::vector<Term> terms;
    const std::pair<int, const SpMat*> arms[] = {{4, &o.a1}, {3, &o.a2}};
    for (const auto& [e, a] : arms) {
        const SpMat proj = o.q(e, e);
        stat += SpMat(w * SpMat(SpMat(SpMat(a->adjoint()) * *a) * proj)) + SpMat(shift * proj);
        terms.push_back({SpMat(SpMat(a->adjoint()) * proj), [g, w, t0](double t) { return I1 * g * std::exp(-I1 * (w * (t - t0))); }});
        terms.push_back({SpMat(*a * proj), [g, w, t0](double t) { return -I1 * g * std::exp(I1 * (w * (t - t0))); }});
    }
    terms.push_back({stat, {}});
    return TimeDepOp(spec.dim(), terms);
}

TimeDepOp build_step3_reduced(const HilbertSpec& spec, const ProtocolParams& p, CoefFn omega_s3) {
    if (p.N >= spec.d) throw DimensionError("cavity truncation too small for N photons");
    const int d = spec.d;
    const Vec disp0 = coherent_state(p.alpha0, d);
    // |N><0~| on one cavity
    SpMat flip(d, d);
    for (int m = 0; m < d; ++m)
        if (std::abs(disp0(m)) > 0.0) flip.insert(p.N, m) = std::conj(disp0(m));
    flip.makeCompressed();
    const SpMat id = identity(d);
    const SpMat c1 = Eigen::kroneckerProduct(flip, id), c2 = Eigen::kroneckerProduct(id, flip);
    SpMat up = Eigen::kroneckerProduct(qudit_transition(0, 4), c1);
    up += SpMat(Eigen::kroneckerProduct(qudit_transition(0, 3), c2));
    up.makeCompressed();
    std::vector<Term> terms{{up, omega_s3}, {SpMat(up.adjoint()), [omega_s3](double t) { return std::conj(omega_s3(t)); }}};
    return TimeDepOp(spec.dim(), terms);
}

TimeDepOp build_crosstalk(const HilbertSpec& spec, double lambda12, double detuning) {
    const Ops o(spec);
    std::vector<Term> terms;
    if (lambda12 != 0.0) {
        terms.push_back({SpMat(lambda12 * SpMat(o.a1.adjoint()) * o.a2), [detuning](double t) { return std::exp(I1 * (detuning * t)); }});
        terms.push_back({SpMat(lambda12 * SpMat(o.a2.adjoint()) * o.a1), [detuning](double t) { return std::exp(-I1 * (detuning * t)); }});
    }
    return TimeDepOp(spec.dim(), terms);
}

SpMat crosstalk_dispersive(const HilbertSpec& spec, double lambda12, double detuning) {
    if (detuning == 0.0) throw ParameterError("crosstalk detuning must be nonzero");
    const Ops o(spec);
    return SpMat((lambda12 * lambda12 / detuning) * (o.n1 - o.n2));
}

}  // namespace noonsim
