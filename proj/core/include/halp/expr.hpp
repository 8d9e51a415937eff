#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace halp {

/// Immutable expression tree over a joint assignment z (state values
/// followed by action values; discrete values stored as small integers).
///
/// Text form is prefix notation:
///   2.5  x1  (+ a b ...)  (- a b)  (- a)  (* a b ...)  (min a b ...)
///   (max a b ...)  (ind v k)  (clamp e lo hi)  (pow e n)
///   (normal e mu sigma)  (table (v1 v2 ...) c0 c1 ...)
/// `normal` is the Gaussian density N(e | mu, sigma); `table` is a dense
/// row-major table over discrete variables (last variable fastest).
class Expr {
public:
    enum class Kind : std::uint8_t { Const, Var, Add, Sub, Mul, Min, Max, Ind, Clamp, Pow, Normal, Table };

    Expr();

    static Expr constant(double v);
    static Expr var(int id);
    static Expr indicator(int id, int value);
    static Expr clamp(Expr e, double lo, double hi);
    static Expr pow(Expr e, int n);
    static Expr normal(Expr e, double mu, double sigma);
    static Expr table(std::vector<int> vars, std::vector<int> sizes, std::vector<double> values);
    static Expr nary(Kind kind, std::vector<Expr> args);

    Kind kind() const;
    double eval(std::span<const double> z) const;

    /// Sorted, deduplicated variable ids read by the expression.
    std::vector<int> variables() const;

    /// Largest variable id referenced, or -1.
    int max_variable() const;

    friend Expr operator+(Expr a, Expr b);
    friend Expr operator-(Expr a, Expr b);
    friend Expr operator*(Expr a, Expr b);
    friend Expr operator-(Expr a);
    friend Expr min(Expr a, Expr b);
    friend Expr max(Expr a, Expr b);

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    void collect(std::vector<int>& out) const;

    std::shared_ptr<const Node> node_;

    friend std::string to_text(const Expr& e, const std::function<std::string(int)>& name_of);
};

Expr operator+(Expr a, double b);
Expr operator*(double a, Expr b);

/// Variable reference for the parser: joint id and level count (0 = continuous).
struct VarRef {
    int id = 0;
    int levels = 0;
};

using VarLookup = std::function<std::optional<VarRef>(std::string_view)>;

std::string to_text(const Expr& e, const std::function<std::string(int)>& name_of);

/// Throws ConfigError with position information on malformed input.
Expr parse_expr(std::string_view text, const VarLookup& lookup);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace halp
