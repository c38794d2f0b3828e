"""Two-site Bose-Einstein condensate with balanced gain and loss."""
