#pragma once

#include <memory>
#include <vector>

namespace foliate {

// Profile u(s) on uniform nodes in [s_min, s_max], C^2 cubic spline with end slopes
// fixed by second-order one-sided differences (so the spline is linear in the node values).
class AdaptedProfile {
public:
    enum class Outside { Clamp, Zero };

    AdaptedProfile(double s_min, double s_max, std::vector<double> values,
                   Outside outside = Outside::Clamp);
    // Profile on [-c, 0] sampled from a function.
    template <class F>
    static AdaptedProfile sampled(double s_min, double s_max, int n, F&& f,
                                  Outside outside = Outside::Clamp) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = f(s_min + (s_max - s_min) * i / (n - 1));
        return AdaptedProfile(s_min, s_max, std::move(v), outside);
    }

    double s_min() const { return s_min_; }
    double s_max() const { return s_max_; }
    int size() const { return static_cast<int>(u_.size()); }
    double spacing() const { return (s_max_ - s_min_) / (size() - 1); }
    double node(int i) const { return s_min_ + i * spacing(); }
    const std::vector<double>& values() const { return u_; }
    const std::vector<double>& slopes() const { return m_; }
    Outside outside() const { return outside_; }

    double operator()(double s) const;
    double derivative(double s) const;
    // exact integral of the spline over [s_min, s_max]
    double integral() const;

    // value(s) = c[0] u_j + c[1] m_j + c[2] u_{j+1} + c[3] m_{j+1}; j = -1 means zero.
    struct Basis {
        int j = -1;
        double c[4] = {0, 0, 0, 0};
    };
    Basis basis(double s) const;

    // Dense slope map m = D u, row-major n x n; shared across profiles of equal layout.
    static std::shared_ptr<const std::vector<double>> slope_matrix(int n, double spacing);
    static std::vector<double> slopes_for(const std::vector<double>& u, double spacing);

private:
    double s_min_, s_max_;
    std::vector<double> u_, m_;
    Outside outside_;
};

}  // namespace foliate
