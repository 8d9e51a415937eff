#include "halp/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "halp/error.hpp"

namespace halp {

struct Expr::Node {
    Kind kind = Kind::Const;
    double value = 0.0;
    int var = -1;
    int ivalue = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<Expr> args;
    std::vector<int> vars;
    std::vector<int> sizes;
    std::vector<double> table;
};

namespace {

std::shared_ptr<Expr::Node> make_node(Expr::Kind k) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    return n;
}

double read(std::span<const double> z, int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= z.size()) {
        throw ContractViolation("expression reads variable " + std::to_string(id) +
                                " outside the assignment of size " + std::to_string(z.size()));
    }
    return z[static_cast<std::size_t>(id)];
}

const char* head_name(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Add: return "+";
        case Expr::Kind::Sub: return "-";
        case Expr::Kind::Mul: return "*";
        case Expr::Kind::Min: return "min";
        case Expr::Kind::Max: return "max";
        case Expr::Kind::Ind: return "ind";
        case Expr::Kind::Clamp: return "clamp";
        case Expr::Kind::Pow: return "pow";
        case Expr::Kind::Normal: return "normal";
        case Expr::Kind::Table: return "table";
        default: return "?";
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Expr::Expr() : node_(make_node(Kind::Const)) {}

Expr Expr::constant(double v) {
    auto n = make_node(Kind::Const);
    n->value = v;
    return Expr(n);
}

Expr Expr::var(int id) {
    auto n = make_node(Kind::Var);
    n->var = id;
    return Expr(n);
}

Expr Expr::indicator(int id, int value) {
    auto n = make_node(Kind::Ind);
    n->var = id;
    n->ivalue = value;
    return Expr(n);
}

Expr Expr::clamp(Expr e, double lo, double hi) {
    if (!(lo <= hi)) throw ConfigError("clamp bounds must satisfy lo <= hi");
    auto n = make_node(Kind::Clamp);
    n->args = {std::move(e)};
    n->lo = lo;
    n->hi = hi;
    return Expr(n);
}

Expr Expr::pow(Expr e, int exponent) {
    if (exponent < 0) throw ConfigError("pow exponent must be a nonnegative integer");
    auto n = make_node(Kind::Pow);
    n->args = {std::move(e)};
    n->ivalue = exponent;
    return Expr(n);
}

Expr Expr::normal(Expr e, double mu, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("normal sigma must be positive");
    auto n = make_node(Kind::Normal);
    n->args = {std::move(e)};
    n->lo = mu;
    n->hi = sigma;
    return Expr(n);
}

Expr Expr::table(std::vector<int> vars, std::vector<int> sizes, std::vector<double> values) {
    if (vars.size() != sizes.size()) throw ConfigError("table: variable and size lists differ in length");
    std::size_t total = 1;
    for (int s : sizes) {
        if (s < 1) throw ConfigError("table: variables must be discrete");
        total *= static_cast<std::size_t>(s);
    }
    if (values.size() != total) {
        throw ConfigError("table: expected " + std::to_string(total) + " entries, got " +
                          std::to_string(values.size()));
    }
    auto n = make_node(Kind::Table);
    n->vars = std::move(vars);
    n->sizes = std::move(sizes);
    n->table = std::move(values);
    return Expr(n);
}

Expr Expr::nary(Kind kind, std::vector<Expr> args) {
    switch (kind) {
        case Kind::Add:
        case Kind::Mul:
        case Kind::Min:
        case Kind::Max:
            if (args.empty()) throw ConfigError(std::string("'") + head_name(kind) + "' needs arguments");
            break;
        case Kind::Sub:
            if (args.size() != 1 && args.size() != 2) throw ConfigError("'-' takes one or two arguments");
            break;
        default:
            throw ConfigError("nary: not an n-ary operator");
    }
    auto n = make_node(kind);
    n->args = std::move(args);
    return Expr(n);
}

Expr::Kind Expr::kind() const {
    return node_->kind;
}

double Expr::eval(std::span<const double> z) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Const: return n.value;
        case Kind::Var: return read(z, n.var);
        case Kind::Add: {
            double s = 0.0;
            for (const auto& a : n.args) s += a.eval(z);
            return s;
        }
        case Kind::Sub:
            if (n.args.size() == 1) return -n.args[0].eval(z);
            return n.args[0].eval(z) - n.args[1].eval(z);
        case Kind::Mul: {
            double p = 1.0;
            for (const auto& a : n.args) p *= a.eval(z);
            return p;
        }
        case Kind::Min: {
            double m = n.args[0].eval(z);
            for (std::size_t i = 1; i < n.args.size(); ++i) m = std::min(m, n.args[i].eval(z));
            return m;
        }
        case Kind::Max: {
            double m = n.args[0].eval(z);
            for (std::size_t i = 1; i < n.args.size(); ++i) m = std::max(m, n.args[i].eval(z));
            return m;
        }
        case Kind::Ind: return std::lround(read(z, n.var)) == n.ivalue ? 1.0 : 0.0;
        case Kind::Clamp: return std::clamp(n.args[0].eval(z), n.lo, n.hi);
        case Kind::Pow: {
            const double b = n.args[0].eval(z);
            double p = 1.0;
            for (int i = 0; i < n.ivalue; ++i) p *= b;
            return p;
        }
        case Kind::Normal: {
            const double t = (n.args[0].eval(z) - n.lo) / n.hi;
            return std::exp(-0.5 * t * t) / (n.hi * std::sqrt(2.0 * std::numbers::pi));
        }
        case Kind::Table: {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < n.vars.size(); ++i) {
                const long v = std::lround(read(z, n.vars[i]));
                if (v < 0 || v >= n.sizes[i]) {
                    throw ContractViolation("table lookup: value " + std::to_string(v) + " out of range for variable " +
                                            std::to_string(n.vars[i]));
                }
                idx = idx * static_cast<std::size_t>(n.sizes[i]) + static_cast<std::size_t>(v);
            }
            return n.table[idx];
        }
    }
    return 0.0;
}

void Expr::collect(std::vector<int>& out) const {
    const Node& n = *node_;
    if (n.kind == Kind::Var || n.kind == Kind::Ind) out.push_back(n.var);
    for (int v : n.vars) out.push_back(v);
    for (const auto& a : n.args) a.collect(out);
}

std::vector<int> Expr::variables() const {
    std::vector<int> out;
    collect(out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int Expr::max_variable() const {
    const auto vs = variables();
    return vs.empty() ? -1 : vs.back();
}

Expr operator+(Expr a, Expr b) {
    return Expr::nary(Expr::Kind::Add, {std::move(a), std::move(b)});
}
Expr operator-(Expr a, Expr b) {
    return Expr::nary(Expr::Kind::Sub, {std::move(a), std::move(b)});
}
Expr operator*(Expr a, Expr b) {
    return Expr::nary(Expr::Kind::Mul, {std::move(a), std::move(b)});
}
Expr operator-(Expr a) {
    return Expr::nary(Expr::Kind::Sub, {std::move(a)});
}
Expr min(Expr a, Expr b) {
    return Expr::nary(Expr::Kind::Min, {std::move(a), std::move(b)});
}
Expr max(Expr a, Expr b) {
    return Expr::nary(Expr::Kind::Max, {std::move(a), std::move(b)});
}
Expr operator+(Expr a, double b) {
    return std::move(a) + Expr::constant(b);
}
Expr operator*(double a, Expr b) {
    return Expr::constant(a) * std::move(b);
}

std::string to_text(const Expr& e, const std::function<std::string(int)>& name_of) {
    const Expr::Node& n = *e.node_;
    using K = Expr::Kind;
    switch (n.kind) {
        case K::Const: return format_double(n.value);
        case K::Var: return name_of(n.var);
        case K::Ind: return "(ind " + name_of(n.var) + " " + std::to_string(n.ivalue) + ")";
        case K::Clamp:
            return "(clamp " + to_text(n.args[0], name_of) + " " + format_double(n.lo) + " " + format_double(n.hi) + ")";
        case K::Pow: return "(pow " + to_text(n.args[0], name_of) + " " + std::to_string(n.ivalue) + ")";
        case K::Normal:
            return "(normal " + to_text(n.args[0], name_of) + " " + format_double(n.lo) + " " + format_double(n.hi) +
                   ")";
        case K::Table: {
            std::string s = "(table (";
            for (std::size_t i = 0; i < n.vars.size(); ++i) {
                if (i) s += ' ';
                s += name_of(n.vars[i]);
            }
            s += ')';
            for (double v : n.table) s += " " + format_double(v);
            return s + ")";
        }
        default: {
            std::string s = std::string("(") + head_name(n.kind);
            for (const auto& a : n.args) s += " " + to_text(a, name_of);
            return s + ")";
        }
    }
}

namespace {

class Parser {
public:
    Parser(std::string_view text, const VarLookup& lookup) : text_(text), lookup_(lookup) {}

    Expr parse_all() {
        Expr e = parse();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression parse error at offset " + std::to_string(pos_) + ": " + what + " in '" +
                          std::string(text_) + "'");
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r'))
            ++pos_;
    }

    std::string_view atom() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ' ' &&
               text_[pos_] != '\t' && text_[pos_] != '\n' && text_[pos_] != '\r')
            ++pos_;
        if (start == pos_) fail("expected a token");
        return text_.substr(start, pos_ - start);
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    static std::optional<double> as_number(std::string_view tok) {
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) return std::nullopt;
        return v;
    }

    double number() {
        const auto tok = atom();
        const auto v = as_number(tok);
        if (!v) fail("expected a number, got '" + std::string(tok) + "'");
        return *v;
    }

    int integer() {
        const auto tok = atom();
        int v = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
            fail("expected an integer, got '" + std::string(tok) + "'");
        }
        return v;
    }

    VarRef variable() {
        const auto tok = atom();
        const auto ref = lookup_(tok);
        if (!ref) fail("unknown variable '" + std::string(tok) + "'");
        return *ref;
    }

    Expr parse() {
        if (!peek('(')) {
            const auto tok = atom();
            if (auto v = as_number(tok)) return Expr::constant(*v);
            const auto ref = lookup_(tok);
            if (!ref) fail("unknown variable '" + std::string(tok) + "'");
            return Expr::var(ref->id);
        }
        expect('(');
        const std::string head(atom());
        Expr out;
        if (head == "ind") {
            const VarRef v = variable();
            if (v.levels == 0) fail("'ind' needs a discrete variable");
            const int k = integer();
            if (k < 0 || k >= v.levels) fail("'ind' value out of range");
            out = Expr::indicator(v.id, k);
        } else if (head == "clamp") {
            Expr e = parse();
            const double lo = number();
            const double hi = number();
            out = Expr::clamp(std::move(e), lo, hi);
        } else if (head == "pow") {
            Expr e = parse();
            out = Expr::pow(std::move(e), integer());
        } else if (head == "normal") {
            Expr e = parse();
            const double mu = number();
            const double sigma = number();
            out = Expr::normal(std::move(e), mu, sigma);
        } else if (head == "table") {
            expect('(');
            std::vector<int> vars, sizes;
            while (!peek(')')) {
                const VarRef v = variable();
                if (v.levels == 0) fail("'table' needs discrete variables");
                vars.push_back(v.id);
                sizes.push_back(v.levels);
            }
            expect(')');
            std::vector<double> values;
            while (!peek(')')) values.push_back(number());
            out = Expr::table(std::move(vars), std::move(sizes), std::move(values));
        } else {
            Expr::Kind k;
            if (head == "+") k = Expr::Kind::Add;
            else if (head == "-") k = Expr::Kind::Sub;
            else if (head == "*") k = Expr::Kind::Mul;
            else if (head == "min") k = Expr::Kind::Min;
            else if (head == "max") k = Expr::Kind::Max;
            else fail("unknown operator '" + head + "'");
            std::vector<Expr> args;
            while (!peek(')')) {
                if (pos_ >= text_.size()) fail("unterminated expression");
                args.push_back(parse());
            }
            out = Expr::nary(k, std::move(args));
        }
        expect(')');
        return out;
    }

    std::string_view text_;
    const VarLookup& lookup_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, const VarLookup& lookup) {
    return Parser(text, lookup).parse_all();
}

}  // namespace halp
