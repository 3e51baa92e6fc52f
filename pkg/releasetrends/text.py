# -*- coding: utf-8 -*-
"""
Release note mining: preprocessing, TF-IDF term vectors and Lasso
regression of rating trend changes on term weights.
"""
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import (
    AbstractSet,
    Dict,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from nltk.stem.porter import PorterStemmer
from sklearn.model_selection import KFold

from releasetrends.exceptions import DomainError, EmptyInput, NonConvergence
from releasetrends.segmentation import SignificantUpdate
from releasetrends.snapshots import IntervalCategory, ReleaseEvent
from releasetrends.stats import FloatArray
from releasetrends.stopwords import ENGLISH_STOPWORDS

logger = logging.getLogger(__name__)

DEFAULT_MIN_DF = 2
DEFAULT_TOP_TERMS = 500
DEFAULT_LASSO_FOLDS = 5
DEFAULT_LASSO_PATH_SIZE = 50
DEFAULT_LASSO_TOL = 1e-8
DEFAULT_LASSO_MAX_ITER = 10000
LASSO_PATH_RATIO = 1e-3

_SPLIT_PATTERN = re.compile(r"[\W_]+")
_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


def stem(token: str) -> str:
    return str(_stemmer.stem(token))


def preprocess(
    text: Optional[str], stopwords: AbstractSet[str] = ENGLISH_STOPWORDS
) -> List[str]:
    """
    Lowercases the text, splits it on non-alphanumeric characters, drops
    stop words and tokens shorter than two characters, and Porter-stems
    what remains.
    """
    if not text:
        return []
    tokens = _SPLIT_PATTERN.split(text.lower())
    return [stem(t) for t in tokens if len(t) > 1 and t not in stopwords]


@dataclass(frozen=True)
class Vocabulary:
    """
    Sorted terms with their document frequencies over n_documents documents.
    """

    terms: Tuple[str, ...]
    document_frequency: Tuple[int, ...]
    n_documents: int
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if list(self.terms) != sorted(set(self.terms)):
            raise DomainError("Vocabulary terms must be sorted and unique")
        if len(self.terms) != len(self.document_frequency):
            raise DomainError("Vocabulary terms and frequencies differ in length")
        if any(df < 1 or df > self.n_documents for df in self.document_frequency):
            raise DomainError("Document frequencies must be in [1, n_documents]")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def index_of(self, term: str) -> Optional[int]:
        return self._index.get(term)

    def idf(self, index: int) -> float:
        return float(np.log(self.n_documents / self.document_frequency[index]))


@dataclass(frozen=True)
class TermVector:
    """
    Sparse TF-IDF weights keyed by vocabulary index. Zero weights are not
    stored.
    """

    weights: Mapping[int, float]
    dimension: int

    def __post_init__(self) -> None:
        for index, weight in self.weights.items():
            if not 0 <= index < self.dimension:
                raise DomainError(f"Term index {index} outside vocabulary")
            if weight < 0:
                raise DomainError(f"Term weight must be >= 0: {weight}")

    def weight(self, index: int) -> float:
        return self.weights.get(index, 0.0)

    def to_array(self) -> FloatArray:
        dense = np.zeros(self.dimension)
        for index, weight in self.weights.items():
            dense[index] = weight
        return dense


@dataclass(frozen=True)
class TermImportance:
    """
    Nonzero Lasso coefficients per term for one group of updates. A positive
    coefficient means the term goes with an improving rating trend.
    """

    group: str
    coefficients: Mapping[str, float]
    lam: float
    n_samples: int


def fit_vocabulary(
    documents: Sequence[Sequence[str]], min_df: int = DEFAULT_MIN_DF
) -> Vocabulary:
    if min_df < 1:
        raise DomainError(f"Minimum document frequency must be >= 1: {min_df}")
    if not any(documents):
        raise EmptyInput("Vocabulary needs at least one nonempty document")
    df: Counter[str] = Counter()
    for document in documents:
        df.update(set(document))
    terms = tuple(sorted(t for t, count in df.items() if count >= min_df))
    return Vocabulary(
        terms=terms,
        document_frequency=tuple(df[t] for t in terms),
        n_documents=len(documents),
    )


def tfidf(document: Iterable[str], vocab: Vocabulary) -> TermVector:
    """
    Raw term count times ln(N / df). Tokens outside the vocabulary are
    ignored and the vector isn't normalised.
    """
    weights: Dict[int, float] = {}
    for term, count in sorted(Counter(document).items()):
        index = vocab.index_of(term)
        if index is None:
            continue
        weight = count * vocab.idf(index)
        if weight > 0:
            weights[index] = weight
    return TermVector(weights=weights, dimension=len(vocab))


def design_matrix(vectors: Sequence[TermVector]) -> FloatArray:
    if not vectors:
        raise EmptyInput("No term vectors")
    dimension = vectors[0].dimension
    x = np.zeros((len(vectors), dimension))
    for row, vector in enumerate(vectors):
        if vector.dimension != dimension:
            raise DomainError("Term vectors differ in dimension")
        for index, weight in vector.weights.items():
            x[row, index] = weight
    return x


def top_terms(
    vectors: Sequence[TermVector], n: int = DEFAULT_TOP_TERMS
) -> List[int]:
    """
    Indices of the n terms with the largest total weight, in index order.
    Terms with zero total weight are never selected.
    """
    mass = design_matrix(vectors).sum(axis=0)
    order = sorted(
        (i for i in range(len(mass)) if mass[i] > 0), key=lambda i: (-mass[i], i)
    )
    return sorted(order[:n])


@dataclass(frozen=True, eq=False)
class LassoFit:
    """
    A Lasso solution. Coefficients are in the original feature scale. The
    objective is recorded after every coordinate descent sweep.
    """

    coefficients: FloatArray
    intercept: float
    lam: float
    n_iter: int
    objective_history: Tuple[float, ...]

    @property
    def support(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.coefficients)]

    def predict(self, x: FloatArray) -> FloatArray:
        return np.asarray(x) @ self.coefficients + self.intercept

    def importance(
        self,
        vocab: Vocabulary,
        group: str,
        columns: Optional[Sequence[int]] = None,
        n_samples: int = 0,
    ) -> TermImportance:
        """
        Maps nonzero coefficients to terms. Columns give the vocabulary index
        of each coefficient when the fit used a subset of terms.
        """
        indices = list(columns) if columns is not None else list(range(len(vocab)))
        coefficients = {
            vocab.terms[indices[i]]: float(self.coefficients[i]) for i in self.support
        }
        return TermImportance(
            group=group,
            coefficients=coefficients,
            lam=self.lam,
            n_samples=n_samples,
        )


class _StandardizedDesign:
    """
    Columns centred and scaled to unit population standard deviation.
    Constant columns are left out and get coefficient 0.
    """

    def __init__(self, x: FloatArray, y: FloatArray):
        if x.ndim != 2 or len(x) != len(y):
            raise DomainError(f"Design {x.shape} doesn't match {len(y)} targets")
        if len(y) < 2:
            raise DomainError("Lasso needs at least 2 samples")
        self.n, self.p = x.shape
        self.mean = x.mean(axis=0)
        self.scale = x.std(axis=0)
        self.active = np.flatnonzero(self.scale > 0)
        self.z = (x[:, self.active] - self.mean[self.active]) / self.scale[self.active]
        self.y_mean = float(y.mean())
        self.yc = y - self.y_mean

    def lambda_max(self) -> float:
        if len(self.active) == 0:
            return 0.0
        return float(np.max(np.abs(self.z.T @ self.yc)) / self.n)

    def objective(self, b: FloatArray, lam: float) -> float:
        residual = self.yc - self.z @ b
        return float(residual @ residual / (2 * self.n) + lam * np.abs(b).sum())

    def to_fit(
        self, b: FloatArray, lam: float, n_iter: int, history: List[float]
    ) -> LassoFit:
        coefficients = np.zeros(self.p)
        coefficients[self.active] = b / self.scale[self.active]
        intercept = self.y_mean - float(self.mean @ coefficients)
        return LassoFit(
            coefficients=coefficients,
            intercept=intercept,
            lam=lam,
            n_iter=n_iter,
            objective_history=tuple(history),
        )


def _soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def _coordinate_descent(
    design: _StandardizedDesign,
    lam: float,
    start: FloatArray,
    tol: float,
    max_iter: int,
) -> LassoFit:
    z = design.z
    n = design.n
    b = start.copy()
    residual = design.yc - z @ b
    history: List[float] = []
    for sweep in range(1, max_iter + 1):
        max_change = 0.0
        for j in range(len(b)):
            column = z[:, j]
            rho = float(column @ residual) / n + b[j]
            new = _soft_threshold(rho, lam)
            change = new - b[j]
            if change != 0.0:
                residual -= change * column
                b[j] = new
                max_change = max(max_change, abs(change))
        history.append(design.objective(b, lam))
        if max_change < tol:
            logger.debug("Lasso converged in %d sweeps at lambda %g", sweep, lam)
            return design.to_fit(b, lam, sweep, history)
    raise NonConvergence(
        f"Lasso didn't converge in {max_iter} sweeps at lambda {lam}",
        last_iterate=design.to_fit(b, lam, max_iter, history),
    )


LassoInput = Union[FloatArray, Sequence[TermVector]]


def _as_design(x: LassoInput) -> FloatArray:
    if isinstance(x, np.ndarray):
        return np.asarray(x, dtype=np.float64)
    return design_matrix(x)


def lasso_fit(
    x: LassoInput,
    y: Sequence[float],
    lam: float,
    tol: float = DEFAULT_LASSO_TOL,
    max_iter: int = DEFAULT_LASSO_MAX_ITER,
) -> LassoFit:
    """
    Minimises (1/2n)·|y - Xb|² + lam·|b|₁ by cyclic coordinate descent on
    standardised columns and centred y. Converged when no coefficient moves
    by tol or more in a sweep.

    Raises NonConvergence, carrying the last iterate, after max_iter sweeps.
    """
    if lam < 0:
        raise DomainError(f"Lasso penalty must be >= 0: {lam}")
    design = _StandardizedDesign(_as_design(x), np.asarray(y, dtype=np.float64))
    return _coordinate_descent(
        design, lam, np.zeros(len(design.active)), tol, max_iter
    )


def lambda_max(x: LassoInput, y: Sequence[float]) -> float:
    """
    Smallest penalty at which every coefficient is zero.
    """
    design = _StandardizedDesign(_as_design(x), np.asarray(y, dtype=np.float64))
    return design.lambda_max()


def lambda_grid(top: float, size: int = DEFAULT_LASSO_PATH_SIZE) -> FloatArray:
    if top <= 0:
        return np.zeros(1)
    return np.logspace(np.log10(top), np.log10(top * LASSO_PATH_RATIO), size)


def lasso_path(
    x: LassoInput,
    y: Sequence[float],
    lambdas: Sequence[float],
    tol: float = DEFAULT_LASSO_TOL,
    max_iter: int = DEFAULT_LASSO_MAX_ITER,
) -> List[LassoFit]:
    """
    Fits in the given order, each fit starting from the previous solution.
    """
    design = _StandardizedDesign(_as_design(x), np.asarray(y, dtype=np.float64))
    b = np.zeros(len(design.active))
    fits: List[LassoFit] = []
    for lam in lambdas:
        fit = _coordinate_descent(design, float(lam), b, tol, max_iter)
        b = fit.coefficients[design.active] * design.scale[design.active]
        fits.append(fit)
    return fits


@dataclass(frozen=True, eq=False)
class LassoCV:
    lambdas: Tuple[float, ...]
    mean_mse: Tuple[float, ...]
    best_lambda: float
    fit: LassoFit


def lasso_cv(
    x: LassoInput,
    y: Sequence[float],
    folds: int = DEFAULT_LASSO_FOLDS,
    path_size: int = DEFAULT_LASSO_PATH_SIZE,
    seed: int = 0,
    tol: float = DEFAULT_LASSO_TOL,
    max_iter: int = DEFAULT_LASSO_MAX_ITER,
) -> LassoCV:
    """
    Chooses the penalty with the smallest mean held-out squared error over a
    logarithmic path from lambda_max down to a thousandth of it, then refits
    on all samples.
    """
    xs = _as_design(x)
    ys = np.asarray(y, dtype=np.float64)
    if len(ys) < folds:
        raise DomainError(f"Lasso CV needs at least {folds} samples, got {len(ys)}")
    lambdas = lambda_grid(lambda_max(xs, ys), path_size)
    errors = np.zeros((folds, len(lambdas)))
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    for k, (train, test) in enumerate(splitter.split(xs)):
        path = lasso_path(xs[train], ys[train], lambdas, tol, max_iter)
        for i, fit in enumerate(path):
            residual = ys[test] - fit.predict(xs[test])
            errors[k, i] = float(residual @ residual) / len(test)
    mean_mse = errors.mean(axis=0)
    best = int(np.argmin(mean_mse))
    fit = lasso_path(xs, ys, lambdas[: best + 1], tol, max_iter)[-1]
    return LassoCV(
        lambdas=tuple(float(v) for v in lambdas),
        mean_mse=tuple(float(v) for v in mean_mse),
        best_lambda=float(lambdas[best]),
        fit=fit,
    )


def previous_release_texts(
    releases: Iterable[ReleaseEvent],
) -> Dict[Tuple[str, str], Optional[str]]:
    """
    Maps (app_id, ISO day) of each release to the text of the app's
    previous release.
    """
    previous: Dict[Tuple[str, str], Optional[str]] = {}
    last_text: Dict[str, Optional[str]] = {}
    for event in sorted(releases, key=lambda e: (e.app_id, e.day)):
        previous[(event.app_id, event.day.isoformat())] = last_text.get(event.app_id)
        last_text[event.app_id] = event.whats_new
    return previous


def term_importance_by_group(
    links: Sequence[SignificantUpdate],
    releases: Iterable[ReleaseEvent],
    min_df: int = DEFAULT_MIN_DF,
    n_top_terms: int = DEFAULT_TOP_TERMS,
    folds: int = DEFAULT_LASSO_FOLDS,
    path_size: int = DEFAULT_LASSO_PATH_SIZE,
    seed: int = 0,
) -> Dict[IntervalCategory, TermImportance]:
    """
    Regresses the change of rating trend at each significant update on the
    update's term weights, separately per interval category.

    Updates without text, or with the same text as the app's previous
    release, are discarded. The vocabulary is shared by all groups; each
    group regresses on its own top terms with a cross-validated penalty.
    Groups with fewer samples than folds are left out.
    """
    previous = previous_release_texts(releases)
    kept: List[Tuple[SignificantUpdate, List[str]]] = []
    for link in links:
        text = link.release.whats_new
        key = (link.release.app_id, link.release.day.isoformat())
        if not text or text == previous.get(key):
            continue
        kept.append((link, preprocess(text)))
    if not any(tokens for _, tokens in kept):
        raise EmptyInput("No significant update has new release text")
    vocab = fit_vocabulary([tokens for _, tokens in kept], min_df)

    tables: Dict[IntervalCategory, TermImportance] = {}
    for category in IntervalCategory:
        group = [
            (link, tokens)
            for link, tokens in kept
            if link.release.category is category
        ]
        if len(group) < max(folds, 2):
            logger.warning(
                "Too few %s updates with text for term regression: %d",
                category.value,
                len(group),
            )
            continue
        vectors = [tfidf(tokens, vocab) for _, tokens in group]
        columns = top_terms(vectors, n_top_terms)
        if not columns:
            continue
        xs = design_matrix(vectors)[:, columns]
        ys = [link.slope_delta for link, _ in group]
        result = lasso_cv(xs, ys, folds=folds, path_size=path_size, seed=seed)
        table = result.fit.importance(vocab, category.value, columns, len(group))
        tables[category] = table
        logger.info(
            "%s: %d updates, %d terms, %d nonzero coefficients",
            category.value,
            len(group),
            len(columns),
            len(table.coefficients),
        )
    return tables


def term_quadrants(
    successive: TermImportance, sparse: TermImportance
) -> Dict[str, str]:
    """
    Quadrant of each term by the signs of its (sparse, successive)
    coefficients, e.g. "-+" for negative under sparse and positive under
    successive updates. Terms missing from either table are left out.
    """
    quadrants: Dict[str, str] = {}
    for term in sorted(set(successive.coefficients) & set(sparse.coefficients)):
        x = sparse.coefficients[term]
        y = successive.coefficients[term]
        if x == 0 or y == 0:
            continue
        quadrants[term] = ("+" if x > 0 else "-") + ("+" if y > 0 else "-")
    return quadrants
