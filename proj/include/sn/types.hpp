#ifndef SN_TYPES_HPP
#define SN_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sn {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matd = Mat<double>;
using Vecd = Vec<double>;

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct IndexError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct RankError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct SingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GroupCountError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sn

#endif
