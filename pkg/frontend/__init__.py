# Frontend package init file
