"""Exact certificates for rationality of K(C_m x|_r C_n) from cyclotomic norm witnesses."""

__version__ = "0.1.0"
