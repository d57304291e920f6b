from .pixel_classifier import PixelClassifier, pixel_features
