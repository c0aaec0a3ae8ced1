#include "specmatch/classical.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>

namespace specmatch {

namespace {

Eigen::LLT<Eigen::MatrixXd> factorize(const Autocorrelation& r) {
    Eigen::LLT<Eigen::MatrixXd> llt(r.r);
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "autocorrelation matrix is not positive definite (ridge = " << r.ridge << ")";
        if (r.ridge == 0.0) {
            msg << "; retry with a positive ridge, e.g. default_ridge(cube)";
        }
        throw NumericError(msg.str());
    }
    return llt;
}

Vector refined_solve(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& r,
                     const Vector& rhs) {
    Vector x = llt.solve(rhs);
    // One refinement step keeps the residual near machine precision even
    // for ill-conditioned R.
    x += llt.solve(rhs - r * x);
    return x;
}

void check_prior(const SpectralCube& cube, const Spectrum& d) {
    if (d.size() != cube.bands()) {
        throw InvalidArgument("prior spectrum length does not match cube bands");
    }
    if (!d.allFinite()) {
        throw InvalidArgument("prior spectrum contains non-finite values");
    }
}

}  // namespace

double default_ridge(const SpectralCube& cube) {
    cube.validate();
    // trace((1/N) H^T H) = mean squared pixel norm.
    const double trace = cube.data.array().square().sum() / cube.pixels();
    return 1e-6 * trace / cube.bands();
}

Autocorrelation autocorrelation(const SpectralCube& cube, double ridge) {
    cube.validate();
    if (ridge < 0.0) {
        throw InvalidArgument("autocorrelation: ridge must be >= 0");
    }
    Autocorrelation out;
    out.ridge = ridge;
    out.r = (cube.data.transpose() * cube.data) / static_cast<double>(cube.pixels());
    // Symmetrize away accumulation round-off before factorization.
    out.r = ((out.r + out.r.transpose()) * 0.5).eval();
    out.r.diagonal().array() += ridge;
    return out;
}

Vector spd_solve(const Autocorrelation& r, const Vector& rhs) {
    const auto llt = factorize(r);
    return refined_solve(llt, r.r, rhs);
}

CemFilter cem_filter(const Autocorrelation& r, const Spectrum& d) {
    const Vector x = spd_solve(r, d);
    const double denom = d.dot(x);
    if (!(denom > 0.0)) {
        throw NumericError("CEM: d^T R^-1 d is not positive; prior may be zero");
    }
    return CemFilter{x / denom, d};
}

ScoreMap cem_score(const SpectralCube& cube, const Autocorrelation& r, const Spectrum& d,
                   int threads) {
    check_prior(cube, d);
    const CemFilter filter = cem_filter(r, d);
    ScoreMap map;
    map.width = cube.width;
    map.height = cube.height;
    map.scores.resize(cube.pixels());
    parallel_for(cube.pixels(), threads, [&](int begin, int end) {
        map.scores.segment(begin, end - begin) =
            cube.data.middleRows(begin, end - begin) * filter.w;
    });
    return map;
}

ScoreMap cem_score(const SpectralCube& cube, const Spectrum& d, double ridge, int threads) {
    return cem_score(cube, autocorrelation(cube, ridge), d, threads);
}

ScoreMap cem_ensemble(const SpectralCube& cube, const TargetPriorSet& priors, double ridge,
                      int threads) {
    priors.validate();
    const Autocorrelation r = autocorrelation(cube, ridge);
    ScoreMap mean;
    mean.width = cube.width;
    mean.height = cube.height;
    mean.scores = Vector::Zero(cube.pixels());
    for (int i = 0; i < priors.count(); ++i) {
        mean.scores += cem_score(cube, r, priors.prior(i), threads).scores;
    }
    mean.scores /= priors.count();
    return mean;
}

ScoreMap ace_score(const SpectralCube& cube, const Autocorrelation& r, const Spectrum& d,
                   int threads) {
    check_prior(cube, d);
    const auto llt = factorize(r);
    const Vector x = refined_solve(llt, r.r, d);  // R^-1 d
    const double dtd = d.dot(x);
    if (!(dtd > 0.0)) {
        throw NumericError("ACE: d^T R^-1 d is not positive; prior may be zero");
    }

    ScoreMap map;
    map.width = cube.width;
    map.height = cube.height;
    map.scores.resize(cube.pixels());
    // h^T R^-1 h = ||L^-1 h||^2 with R = L L^T; solve the triangular system
    // in pixel blocks.
    const auto& matL = llt.matrixL();
    parallel_for(cube.pixels(), threads, [&](int begin, int end) {
        const int rows = end - begin;
        Eigen::MatrixXd block = cube.data.middleRows(begin, rows).transpose();  // B x rows
        matL.solveInPlace(block);
        for (int i = 0; i < rows; ++i) {
            const double hth = block.col(i).squaredNorm();
            if (hth <= 0.0) {
                map.scores[begin + i] = 0.0;
                continue;
            }
            const double htd = cube.data.row(begin + i).dot(x);
            const double score = (htd * htd) / (dtd * hth);
            map.scores[begin + i] = std::min(1.0, std::max(0.0, score));
        }
    });
    return map;
}

ScoreMap ace_score(const SpectralCube& cube, const Spectrum& d, double ridge, int threads) {
    return ace_score(cube, autocorrelation(cube, ridge), d, threads);
}

ScoreMap ace_ensemble(const SpectralCube& cube, const TargetPriorSet& priors, double ridge,
                      int threads) {
    priors.validate();
    const Autocorrelation r = autocorrelation(cube, ridge);
    ScoreMap mean;
    mean.width = cube.width;
    mean.height = cube.height;
    mean.scores = Vector::Zero(cube.pixels());
    for (int i = 0; i < priors.count(); ++i) {
        mean.scores += ace_score(cube, r, priors.prior(i), threads).scores;
    }
    mean.scores /= priors.count();
    return mean;
}

}  // namespace specmatch
