#include "foliate/profile.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "foliate/error.hpp"

namespace foliate {

std::vector<double> AdaptedProfile::slopes_for(const std::vector<double>& u, double h) {
    const int n = static_cast<int>(u.size());
    std::vector<double> m(n, 0.0);
    if (n == 2) {
        m[0] = m[1] = (u[1] - u[0]) / h;
        return m;
    }
    m[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    m[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
    if (n == 3) {
        m[1] = (u[2] - u[0]) / (2.0 * h);
        return m;
    }
    // m_{i-1} + 4 m_i + m_{i+1} = 3 (u_{i+1} - u_{i-1}) / h, interior rows, Thomas sweep
    const int k = n - 2;
    std::vector<double> cp(k), dp(k);
    for (int r = 0; r < k; ++r) {
        int i = r + 1;
        double rhs = 3.0 * (u[i + 1] - u[i - 1]) / h;
        if (r == 0) rhs -= m[0];
        if (r == k - 1) rhs -= m[n - 1];
        double denom = 4.0 - (r > 0 ? cp[r - 1] : 0.0);
        cp[r] = 1.0 / denom;
        dp[r] = (rhs - (r > 0 ? dp[r - 1] : 0.0)) / denom;
    }
    m[k] = dp[k - 1];
    for (int r = k - 2; r >= 0; --r) m[r + 1] = dp[r] - cp[r] * m[r + 2];
    return m;
}

std::shared_ptr<const std::vector<double>> AdaptedProfile::slope_matrix(int n, double spacing) {
    static std::mutex mutex;
    static std::map<std::pair<int, double>, std::shared_ptr<const std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(n, spacing);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    auto d = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> e(n, 0.0);
    for (int c = 0; c < n; ++c) {
        e[c] = 1.0;
        auto col = slopes_for(e, spacing);
        for (int r = 0; r < n; ++r) (*d)[static_cast<std::size_t>(r) * n + c] = col[r];
        e[c] = 0.0;
    }
    cache.emplace(key, d);
    return d;
}

AdaptedProfile::AdaptedProfile(double s_min, double s_max, std::vector<double> values, Outside outside)
    : s_min_(s_min), s_max_(s_max), u_(std::move(values)), outside_(outside) {
    if (!(s_max_ > s_min_)) throw ValidationError("profile range is empty");
    if (u_.size() < 2) throw ValidationError("profile needs at least two nodes");
    for (double v : u_)
        if (!std::isfinite(v)) throw ValidationError("profile value is not finite");
    m_ = slopes_for(u_, spacing());
}

AdaptedProfile::Basis AdaptedProfile::basis(double s) const {
    Basis b;
    const int n = size();
    if (s < s_min_ || s > s_max_) {
        if (outside_ == Outside::Zero) return b;
        b.j = s < s_min_ ? 0 : n - 2;
        if (s < s_min_) b.c[0] = 1.0;
        else b.c[2] = 1.0;
        return b;
    }
    const double h = spacing();
    double q = (s - s_min_) / h;
    int j = std::min(static_cast<int>(q), n - 2);
    double t = q - j;
    b.j = j;
    b.c[0] = (1 + 2 * t) * (1 - t) * (1 - t);
    b.c[1] = h * t * (1 - t) * (1 - t);
    b.c[2] = t * t * (3 - 2 * t);
    b.c[3] = h * t * t * (t - 1);
    return b;
}

double AdaptedProfile::operator()(double s) const {
    Basis b = basis(s);
    if (b.j < 0) return 0.0;
    return b.c[0] * u_[b.j] + b.c[1] * m_[b.j] + b.c[2] * u_[b.j + 1] + b.c[3] * m_[b.j + 1];
}

double AdaptedProfile::derivative(double s) const {
    if (s < s_min_ || s > s_max_) return 0.0;
    const int n = size();
    const double h = spacing();
    double q = (s - s_min_) / h;
    int j = std::min(static_cast<int>(q), n - 2);
    double t = q - j;
    double d00 = (6 * t * t - 6 * t) / h, d10 = 3 * t * t - 4 * t + 1;
    double d11 = 3 * t * t - 2 * t;
    return d00 * u_[j] + d10 * m_[j] - d00 * u_[j + 1] + d11 * m_[j + 1];
}

double AdaptedProfile::integral() const {
    const double h = spacing();
    double acc = 0.0;
    for (int j = 0; j + 1 < size(); ++j)
        acc += 0.5 * h * (u_[j] + u_[j + 1]) + h * h * (m_[j] - m_[j + 1]) / 12.0;
    return acc;
}

}  // namespace foliate
