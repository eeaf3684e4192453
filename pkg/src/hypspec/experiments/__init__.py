"""Constructions and audits built on the mesher and the solver."""

from .audit import (
    AuditError,
    buser_squeeze,
    count_below_bound,
    courant_check,
    cover_contains_base,
    family_bound,
    family_disjointness,
    small_eigenvalue_audit,
    verify_variational,
)
from .families import (
    ResolutionError,
    TestFamily,
    buser_surface,
    buser_test_functions,
    randol_family,
    randol_quotient_bound,
)
from .nodal import NodalDomain, NodalReport, nodal_domains
from .campaign import CampaignConfig, ConfigError, config_from_dict, load_config, run_campaign, write_rows
