// Explicit instantiations of the expensive numeric templates, compiled once.

#include "ratbary/linalg.hpp"
#include "ratbary/loewner.hpp"

namespace ratbary {

template BasicSingularPair<double> smallest_singular_pair<double>(const BasicComplexMatrix<double>&);
template BasicSingularPair<long double> smallest_singular_pair<long double>(const BasicComplexMatrix<long double>&);
template class detail::GrowingQr<long double>;
template class BasicLoewnerState<long double>;
template BasicComplexMatrix<long double> loewner_assemble_as<long double>(const Eigen::Ref<const ComplexMatrix>&,
                                                                         std::span<const Complex>,
                                                                         std::span<const Index>);
template BasicComplexMatrix<double> loewner_assemble_as<double>(const Eigen::Ref<const ComplexMatrix>&,
                                                               std::span<const Complex>, std::span<const Index>);

} // namespace ratbary
