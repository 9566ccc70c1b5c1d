#pragma once

// The identity suite run by `verify`: each check reports a verdict and a
// one-line piece of evidence.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "multisym/hamiltonian.hpp"
#include "multisym/legendre.hpp"

namespace multisym {

enum class Verdict { Proven, SampledPass, Fail };

[[nodiscard]] std::string_view verdict_label(Verdict v);

struct IdentityCheck {
  std::string name;
  Verdict verdict = Verdict::Fail;
  std::string evidence;
};

struct VerifyOptions {
  int samples = 64;
  double tol = 1e-10;
  int random_connections = 20;
  std::uint64_t seed = 0xc0ffee;
  /// Used for the covariant checks; a trivial connection when absent.
  std::optional<Connection> connection;
};

/// Proven for a normal-form zero, sampled-pass when every sample is below tol.
[[nodiscard]] Verdict verdict_of(const ZeroTest& z, double tol);
[[nodiscard]] IdentityCheck form_check(std::string name, const DiffForm& difference, const VerifyOptions& opt);
[[nodiscard]] IdentityCheck expr_check(std::string name, const Expr& difference, const VerifyOptions& opt);

/// Polynomial of degree <= `degree` in the listed symbols, small integer coefficients.
[[nodiscard]] Expr random_polynomial(std::span<const Symbol> symbols, int degree, std::mt19937_64& rng);
/// beta^A = a + b y^B + c y^C y^D with 0 < |a| <= 1/2 and |b|, |c| <= 1/2, for vertical lifts.
[[nodiscard]] std::vector<Expr> random_vertical_coefficients(int n, std::mt19937_64& rng);
/// Gamma^A_nu random polynomials in (x, y).
[[nodiscard]] Connection random_connection(int m, int n, std::mt19937_64& rng);

/// FL^* Theta_{h^nabla} - Theta_L - E^nabla_L d^m x.
[[nodiscard]] DiffForm energy_identity_defect(const LagrangianSystem& sys, const Connection& c);

/// Every check applicable to the Lagrangian.
[[nodiscard]] std::vector<IdentityCheck> verify_lagrangian(const LagrangianSystem& sys,
                                                           const VerifyOptions& opt = {});
/// Checks for a Hamiltonian given on its own.
[[nodiscard]] std::vector<IdentityCheck> verify_hamiltonian(const HamiltonianSystem& h,
                                                            const VerifyOptions& opt = {});
/// Bundle-level identities that hold for any (m, N).
[[nodiscard]] std::vector<IdentityCheck> verify_bundle(const BundleSpec& bundle, const VerifyOptions& opt = {});

[[nodiscard]] bool all_pass(const std::vector<IdentityCheck>& checks);

}  // namespace multisym
