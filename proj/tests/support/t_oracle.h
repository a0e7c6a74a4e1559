#ifndef VARIETIES_TESTS_SUPPORT_T_ORACLE_H_
#define VARIETIES_TESTS_SUPPORT_T_ORACLE_H_

namespace varieties::testing {

// Two-tailed p by Simpson integration of the t density over [0, |t|].
double t_oracle(double t, double df);

}  // namespace varieties::testing

#endif  // VARIETIES_TESTS_SUPPORT_T_ORACLE_H_
