# Main package for HomLink
