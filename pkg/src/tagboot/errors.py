"""Exception types shared across the pipeline."""


class TagbootError(Exception):
    """Base class for all data and configuration errors raised by tagboot."""


class CorpusFormatError(TagbootError):
    """Malformed tagset, vertical, or parallel file content."""


class ParallelGapError(TagbootError):
    """Verse ids present on only one side of a parallel corpus.

    Carries the matched pairs plus both lists of unmatched ids so callers can
    decide to drop the gaps and continue.
    """

    def __init__(self, missing_in_source, missing_in_target, pairs):
        self.missing_in_source = tuple(missing_in_source)
        self.missing_in_target = tuple(missing_in_target)
        self.pairs = list(pairs)
        ids = ", ".join(
            str(v) for v in (list(missing_in_source) + list(missing_in_target))
        )
        super().__init__(f"unmatched verse ids in parallel corpus: {ids}")


class PreprocessError(TagbootError):
    """Verse cannot be normalized or split as requested."""


class AlignmentFormatError(TagbootError):
    """Malformed alignment file or out-of-range link."""


class ProjectionError(TagbootError):
    """Inconsistent inputs to tag projection."""


class RuleFormatError(TagbootError):
    """Malformed rule or template file."""


class BootstrapError(TagbootError):
    """Invalid bootstrap schedule, state, or project layout."""


class ConfigError(TagbootError):
    """Malformed project configuration file."""
