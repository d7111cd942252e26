#include "motint/dvr.hpp"

#include <algorithm>

namespace motint {

BackendSpec::BackendSpec(BackendKind k, std::uint32_t prime, int precision)
    : kind(k), p(prime), precision_default(precision) {
    if (!is_prime(prime)) throw std::invalid_argument("not a prime: " + std::to_string(prime));
    if (precision < 1) throw std::invalid_argument("precision must be >= 1");
}

std::string BackendSpec::name() const {
    return kind == BackendKind::P_ADIC ? "Z_" + std::to_string(p) : "F_" + std::to_string(p) + "[[t]]";
}

std::string ExtOrd::str() const {
    return exact ? "Exact(" + std::to_string(v) + ")" : "AtLeast(" + std::to_string(v) + ")";
}

static std::uint32_t mod_u(long long v, std::uint32_t p) {
    long long r = v % static_cast<long long>(p);
    if (r < 0) r += p;
    return static_cast<std::uint32_t>(r);
}

Element Element::integer(const BackendSpec& b, const Integer& z) {
    Element e;
    e.kind_ = b.kind;
    e.p_ = b.p;
    if (b.kind == BackendKind::P_ADIC) {
        e.z_ = z;
    } else {
        Integer r;
        mpz_fdiv_r_ui(r.get_mpz_t(), z.get_mpz_t(), b.p);
        e.c_.push_back(static_cast<std::uint32_t>(r.get_ui()));
        e.trim();
    }
    return e;
}

Element Element::series(const BackendSpec& b, const std::vector<long long>& coeffs) {
    if (b.kind != BackendKind::POWER_SERIES) {
        Integer z = 0, pw = 1;
        for (long long c : coeffs) {
            z += pw * Integer(static_cast<long>(c));
            pw *= b.p;
        }
        return integer(b, z);
    }
    Element e;
    e.kind_ = b.kind;
    e.p_ = b.p;
    for (long long c : coeffs) e.c_.push_back(mod_u(c, b.p));
    e.trim();
    return e;
}

Element Element::pi(const BackendSpec& b) {
    if (b.kind == BackendKind::P_ADIC) return integer(b, Integer(b.p));
    return series(b, {0, 1});
}

Element Element::from_index(const BackendSpec& b, const Integer& i) {
    if (b.kind == BackendKind::P_ADIC) return integer(b, i);
    Element e;
    e.kind_ = b.kind;
    e.p_ = b.p;
    Integer rest = i;
    while (rest > 0) {
        Integer r;
        mpz_fdiv_qr_ui(rest.get_mpz_t(), r.get_mpz_t(), rest.get_mpz_t(), b.p);
        e.c_.push_back(static_cast<std::uint32_t>(r.get_ui()));
    }
    e.trim();
    return e;
}

void Element::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

void Element::check(const Element& o) const {
    if (kind_ != o.kind_ || p_ != o.p_) throw BackendMismatch("elements of different rings");
}

bool Element::is_zero() const { return kind_ == BackendKind::P_ADIC ? z_ == 0 : c_.empty(); }

std::optional<int> Element::ord() const {
    if (is_zero()) return std::nullopt;
    if (kind_ == BackendKind::P_ADIC) return padic_val(z_, p_);
    int v = 0;
    while (c_[v] == 0) ++v;
    return v;
}

std::uint32_t Element::ac() const {
    auto v = ord();
    if (!v) return 0;
    if (kind_ == BackendKind::POWER_SERIES) return c_[*v];
    Integer q;
    Integer pv = ipow(Integer(p_), *v);
    mpz_divexact(q.get_mpz_t(), z_.get_mpz_t(), pv.get_mpz_t());
    return static_cast<std::uint32_t>(mpz_fdiv_ui(q.get_mpz_t(), p_));
}

std::uint32_t Element::residue() const {
    if (kind_ == BackendKind::POWER_SERIES) return c_.empty() ? 0 : c_[0];
    return static_cast<std::uint32_t>(mpz_fdiv_ui(z_.get_mpz_t(), p_));
}

Element Element::operator+(const Element& o) const {
    check(o);
    Element r = *this;
    if (kind_ == BackendKind::P_ADIC) {
        r.z_ += o.z_;
        return r;
    }
    if (o.c_.size() > r.c_.size()) r.c_.resize(o.c_.size(), 0);
    for (std::size_t i = 0; i < o.c_.size(); ++i)
        r.c_[i] = static_cast<std::uint32_t>((static_cast<std::uint64_t>(r.c_[i]) + o.c_[i]) % p_);
    r.trim();
    return r;
}

Element Element::operator-() const {
    Element r = *this;
    if (kind_ == BackendKind::P_ADIC) {
        r.z_ = -z_;
        return r;
    }
    for (auto& c : r.c_) c = c == 0 ? 0 : p_ - c;
    return r;
}

Element Element::operator-(const Element& o) const { return *this + (-o); }

Element Element::operator*(const Element& o) const {
    check(o);
    Element r;
    r.kind_ = kind_;
    r.p_ = p_;
    if (kind_ == BackendKind::P_ADIC) {
        r.z_ = z_ * o.z_;
        return r;
    }
    if (c_.empty() || o.c_.empty()) return r;
    std::vector<std::uint64_t> acc(c_.size() + o.c_.size() - 1, 0);
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0) continue;
        for (std::size_t j = 0; j < o.c_.size(); ++j)
            acc[i + j] = (acc[i + j] + static_cast<std::uint64_t>(c_[i]) * o.c_[j]) % p_;
    }
    r.c_.assign(acc.begin(), acc.end());
    r.trim();
    return r;
}

Element Element::scaled(const Integer& k) const {
    Element r = *this;
    if (kind_ == BackendKind::P_ADIC) {
        r.z_ *= k;
        return r;
    }
    std::uint64_t km = mpz_fdiv_ui(k.get_mpz_t(), p_);
    for (auto& c : r.c_) c = static_cast<std::uint32_t>((c * km) % p_);
    r.trim();
    return r;
}

bool Element::operator==(const Element& o) const {
    if (kind_ != o.kind_ || p_ != o.p_) return false;
    return kind_ == BackendKind::P_ADIC ? z_ == o.z_ : c_ == o.c_;
}

Element Element::mod_pi(int n) const {
    Element r = *this;
    if (kind_ == BackendKind::P_ADIC) {
        Integer m = ipow(Integer(p_), n);
        mpz_fdiv_r(r.z_.get_mpz_t(), z_.get_mpz_t(), m.get_mpz_t());
        return r;
    }
    if (static_cast<int>(r.c_.size()) > n) r.c_.resize(n);
    r.trim();
    return r;
}

Element Element::div_pi(int k) const {
    if (k == 0) return *this;
    auto v = ord();
    if (v && *v < k) throw std::domain_error("div_pi: not divisible");
    Element r = *this;
    if (kind_ == BackendKind::P_ADIC) {
        Integer m = ipow(Integer(p_), k);
        mpz_divexact(r.z_.get_mpz_t(), z_.get_mpz_t(), m.get_mpz_t());
        return r;
    }
    if (!v) return r;
    r.c_.erase(r.c_.begin(), r.c_.begin() + k);
    return r;
}

Element Element::mul_pi(int k) const {
    Element r = *this;
    if (kind_ == BackendKind::P_ADIC) {
        r.z_ *= ipow(Integer(p_), k);
        return r;
    }
    if (!r.c_.empty()) r.c_.insert(r.c_.begin(), k, 0);
    return r;
}

Integer Element::index() const {
    if (kind_ == BackendKind::P_ADIC) return z_;
    Integer r = 0;
    for (std::size_t i = c_.size(); i-- > 0;) r = r * p_ + c_[i];
    return r;
}

std::string Element::str() const {
    if (kind_ == BackendKind::P_ADIC) return z_.get_str();
    if (c_.empty()) return "0";
    std::string out;
    for (std::size_t i = c_.size(); i-- > 0;) {
        if (c_[i] == 0) continue;
        if (!out.empty()) out += " + ";
        std::string mono = i == 0 ? "" : (i == 1 ? "t" : "t^" + std::to_string(i));
        if (mono.empty())
            out += std::to_string(c_[i]);
        else if (c_[i] == 1)
            out += mono;
        else
            out += std::to_string(c_[i]) + "*" + mono;
    }
    return out;
}

TruncatedElement::TruncatedElement(const BackendSpec& b, const Element& raw, int precision)
    : backend_(b), precision_(precision) {
    if (precision < 1) throw std::invalid_argument("precision must be >= 1");
    if (raw.kind() != b.kind || raw.p() != b.p) throw BackendMismatch("element not in backend ring");
    repr_ = raw.mod_pi(precision);
}

std::string TruncatedElement::str() const {
    return repr_.str() + " mod " + (backend_.kind == BackendKind::P_ADIC ? std::to_string(backend_.p) : "t") + "^" +
           std::to_string(precision_);
}

TruncatedElement make_truncated(const BackendSpec& b, const Integer& raw, int N) {
    if (N < 1) throw std::invalid_argument("precision must be >= 1");
    return TruncatedElement(b, Element::integer(b, raw), N);
}

TruncatedElement make_truncated(const BackendSpec& b, const std::vector<long long>& coeffs, int N) {
    if (N < 1) throw std::invalid_argument("precision must be >= 1");
    return TruncatedElement(b, Element::series(b, coeffs), N);
}

ExtOrd ord(const TruncatedElement& x) {
    auto v = x.repr().ord();
    if (!v) return ExtOrd::AtLeast(x.precision());
    return ExtOrd::Exact(*v);
}

ResidueElement angular_component(const TruncatedElement& x) {
    if (x.repr().is_zero()) throw IndeterminateOrder("ord is AtLeast(" + std::to_string(x.precision()) + ")");
    return {x.repr().ac()};
}

TruncatedElement ring_arithmetic(const TruncatedElement& a, const TruncatedElement& b, RingOp op) {
    if (!a.backend().same_ring(b.backend())) throw BackendMismatch("ring_arithmetic across backends");
    int n = std::min(a.precision(), b.precision());
    Element r;
    switch (op) {
        case RingOp::ADD: r = a.repr() + b.repr(); break;
        case RingOp::SUB: r = a.repr() - b.repr(); break;
        case RingOp::MUL: r = a.repr() * b.repr(); break;
    }
    return TruncatedElement(a.backend(), r, n);
}

Integer residue_count(const BackendSpec& b, int N) { return ipow(Integer(b.p), N); }

}  // namespace motint
