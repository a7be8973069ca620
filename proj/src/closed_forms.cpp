#include "infsep/closed_forms.hpp"

namespace infsep {

template ClosedFormLambda<double> lambda_from_sum<double>(double, double, Case);
template ClosedFormLambda<long double> lambda_from_sum<long double>(long double, long double, Case);

}  // namespace infsep
