"""Exception types shared across the package.

Grouped by the subsystem that raises them; everything derives from
ClozegenError so callers can catch broadly at the CLI boundary.
"""

from __future__ import annotations


class ClozegenError(Exception):
    """Base class for all package-specific errors."""


# -- word list / word group files -------------------------------------------

class MalformedCsvError(ClozegenError):
    """Input CSV violates the documented schema."""


class EmptyListError(ClozegenError):
    """A word list or word-group set contains no entries."""


class DuplicateHeadwordError(ClozegenError):
    """The same headword (or headword/tag pair) is defined twice."""


class UnknownPosTagError(ClozegenError):
    """A tag outside the closed Penn tag enumeration was encountered."""


# -- morphology ---------------------------------------------------------------

class UnknownWordError(ClozegenError):
    """Word absent from the lexicon and the fallback rules produce nothing."""


class TagNotApplicableError(ClozegenError):
    """Requested inflection tag does not apply to the headword."""


class EmptyConsensusError(ClozegenError):
    """Primary and secondary taggers agree on no tag at all."""


# -- LLM gateway --------------------------------------------------------------

class GatewayError(ClozegenError):
    """Base class for gateway/transport failures."""


class TransportError(GatewayError):
    """Network or HTTP failure that survived the retry budget."""


class TransportTimeoutError(TransportError):
    """The completion request timed out."""


class ReplayMissError(GatewayError):
    """Replay transport has no stored response for the prompt."""


class NoJsonFoundError(GatewayError):
    """Response text contains no JSON object at all."""


class MalformedJsonError(GatewayError):
    """Response text contains something JSON-like that does not parse."""


# -- stem parsing -------------------------------------------------------------

class NoBackticksError(ClozegenError):
    """Response sentence contains no backtick-delimited key."""


class MultipleKeysError(ClozegenError):
    """Response sentence contains more than one backtick-delimited segment."""


# -- verdict parsing ----------------------------------------------------------

class MissingVerdictError(ClozegenError):
    """Judgment response lacks an entry for a submitted candidate."""

    def __init__(self, word: str):
        super().__init__(f"no verdict returned for candidate {word!r}")
        self.word = word


class NonBooleanFieldError(ClozegenError):
    """A syntax/semantics verdict field is not a JSON boolean."""


# -- pipeline -----------------------------------------------------------------

class ConfigError(ClozegenError):
    """Run configuration is invalid."""


class GenerationExhaustedError(ClozegenError):
    """Every stem attempt for a headword failed validation."""

    def __init__(self, headword: str, attempts: int):
        super().__init__(f"no valid stem for {headword!r} after {attempts} attempts")
        self.headword = headword
        self.attempts = attempts


# -- evaluation ---------------------------------------------------------------

class LengthMismatchError(ClozegenError):
    """Two rating sequences differ in length."""


class EmptyInputError(ClozegenError):
    """A rating sequence is empty."""


class MissingTieBreakError(ClozegenError):
    """A disagreement index has no third-rater verdict."""

    def __init__(self, index: int):
        super().__init__(f"no tie-break verdict for disagreement at index {index}")
        self.index = index


class UnknownCategoryError(ClozegenError):
    """Annotation label uses a category/subcategory outside the vocabulary."""


class InsufficientOverlapError(ClozegenError):
    """Fewer than two reviewers share rated targets."""


# -- review service -----------------------------------------------------------

class MalformedOutputFileError(ClozegenError):
    """The question-item CSV fed to the review service does not parse."""
