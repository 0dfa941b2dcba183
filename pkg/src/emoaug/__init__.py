"""Label-preserving augmentation and evaluation for emotion-labeled SE text."""

from .corpus import Dataset, SplitResult, Utterance, ingest, preprocess_text, stratified_split
from .lexicon import (
    EmotionLexicon,
    PolarityClass,
    PolarityLexicon,
    build_emotion_lexicon,
    parse_nrc,
    parse_sentiwordnet,
    word_emotions,
    word_polarity,
)
from .strategies import AugmentationConfig, AugmentedInstance, augment_dataset
from .taxonomy import BasicEmotion, EmotionTaxonomy, load_taxonomy

__all__ = [
    "AugmentationConfig",
    "AugmentedInstance",
    "BasicEmotion",
    "Dataset",
    "EmotionLexicon",
    "EmotionTaxonomy",
    "PolarityClass",
    "PolarityLexicon",
    "SplitResult",
    "Utterance",
    "augment_dataset",
    "build_emotion_lexicon",
    "ingest",
    "load_taxonomy",
    "parse_nrc",
    "parse_sentiwordnet",
    "preprocess_text",
    "stratified_split",
    "word_emotions",
    "word_polarity",
]

__version__ = "0.1.0"
