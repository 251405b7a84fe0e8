"""Sensitive-attribute clustering for k-anonymization."""

from .engine import (
    AnonymizedRow,
    AnonymizedTable,
    EngineConfig,
    InfeasibleError,
    enforce_k,
    generalize_partition,
    propose_clusters,
    systematic_clusters,
    verify_k_anonymity,
)
from .metrics import (
    Cluster,
    ILReport,
    Partition,
    cluster_il_canonical,
    make_cluster,
    partition_from_blocks,
    total_il_canonical,
    total_il_legacy,
)
from .oracle import OracleResult, enumerate_partitions, optimal_partition
from .schema import (
    Attribute,
    AttributeRole,
    AttributeSchema,
    DataError,
    Dataset,
    MaskRule,
    Record,
    SchemaError,
    load_dataset,
    sort_view,
    strip_identifiers,
)
from .taxonomy import (
    MaskTaxonomy,
    TaxonomyError,
    TaxonomyTree,
    generalize_label,
    load_taxonomy,
    mask_suffix,
    union_height,
)

__version__ = "0.1.0"
