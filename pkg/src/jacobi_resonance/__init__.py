"""Direct and inverse resonance problems for periodic Jacobi operators."""
