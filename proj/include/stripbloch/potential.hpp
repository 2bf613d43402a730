#pragma once

#include <Eigen/Dense>
#include <string>

namespace stripbloch {

// Real potential, compactly supported in x (|x| <= R), L-periodic in y.
// values(x+R, j) = V(x, j) for x in [-R, R], j in [0, L).  Zero outside.
struct StripPotential {
    int L = 1;
    int R = 0;
    Eigen::MatrixXd values; // (2R+1) x L

    double value(int x, int j) const {
        if (x < -R || x > R) return 0.0;
        j %= L;
        if (j < 0) j += L;
        return values(x + R, j);
    }

    double sup_norm() const {
        return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
    }

    bool is_zero() const { return sup_norm() == 0.0; }
};

// Throws ConfigError if dimensions are inconsistent or entries non-finite.
void validate_potential(const StripPotential& v);

// JSON layout: {"L": int, "R": int, "rows": [[real; L] x (2R+1)]}, rows ordered
// x = -R .. R.  Non-rectangular "rows" are rejected with the offending row named.
StripPotential potential_from_json_text(const std::string& text);
std::string potential_to_json_text(const StripPotential& v);

StripPotential load_potential(const std::string& path); // IoError / ConfigError
void save_potential(const StripPotential& v, const std::string& path);

} // namespace stripbloch
