# Backend package init file
